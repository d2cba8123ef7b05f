"""Builds constrained.json: random constrained pricings with subscription
counts from a plain itertools enumeration, independent of the Rust code.

Run from this directory: python3 oracle.py
"""
import itertools
import json
import random


def count(case):
    plans = case["plans"]
    addons = case["addOns"]
    cons = case["constraints"]
    names = [a["name"] for a in addons]
    standalone = {a["name"] for a in addons if a["standalone"]} | set(cons["standaloneAllowed"])

    def admissible(chosen):
        s = set(chosen)
        for a in s:
            if any(d not in s for d in cons["dependsOn"].get(a, [])):
                return False
        for a, others in cons["excludes"].items():
            if a in s and any(o in s for o in others):
                return False
        return True

    subs = set()
    for plan in plans + [None]:
        if plan is None:
            pool = [n for n in names if n in standalone]
        else:
            pool = [a["name"] for a in addons if a["availableFor"] == "all" or plan in a["availableFor"]]
        for r in range(len(pool) + 1):
            for chosen in itertools.combinations(pool, r):
                if plan is None and not chosen:
                    continue
                if admissible(chosen):
                    subs.add((plan, frozenset(chosen)))
    return len(subs)


def case(rng):
    plans = [f"Plan {i}" for i in range(rng.randint(1, 4))]
    addons = []
    for i in range(rng.randint(1, 8)):
        avail = "all" if rng.random() < 0.4 else sorted(rng.sample(plans, rng.randint(0, len(plans))))
        addons.append({"name": f"Add-on {i}", "availableFor": avail, "standalone": rng.random() < 0.2})
    names = [a["name"] for a in addons]
    depends, excludes = {}, {}
    for a in names:
        others = [n for n in names if n != a]
        if others and rng.random() < 0.4:
            depends[a] = sorted(rng.sample(others, rng.randint(1, min(2, len(others)))))
        if others and rng.random() < 0.3:
            excludes[a] = sorted(rng.sample(others, 1))
    standalone_allowed = sorted(n for n in names if rng.random() < 0.2)
    c = {
        "plans": plans,
        "addOns": addons,
        "constraints": {"dependsOn": depends, "excludes": excludes, "standaloneAllowed": standalone_allowed},
    }
    c["expected"] = count(c)
    return c


if __name__ == "__main__":
    rng = random.Random(20240601)
    cases = [case(rng) for _ in range(20)]
    with open("constrained.json", "w") as f:
        json.dump(cases, f, indent=1)
        f.write("\n")
