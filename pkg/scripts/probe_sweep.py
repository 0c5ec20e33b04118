"""Run both correspondence probes over several seeds and summarise them."""
import argparse
import json

from sessionforge import parse_context, parse_global
from sessionforge.association import completeness_probe, soundness_probe

RING = ("rec t . p -> q { add(int) . q -> r { add(int) . r -> p { add(int) . t }, "
        "sub(int) . r -> p { sub(int) . t } } }")
CTX = ("{ p : (eps, rec t . q (+) { add(int) . r & { add(int) . t, sub(int) . t } }), "
       "q : (eps, rec t . r (+) { add(int) . p & { add(int) . t }, sub(int) . p & { add(int) . t } }), "
       "r : (eps, rec t . q & { add(int) . p (+) { add(int) . t }, sub(int) . p (+) { sub(int) . t } }) }")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--global-type", default=RING, help="global type source text")
    ap.add_argument("--context", default=CTX, help="typing context source text")
    ap.add_argument("--steps", type=int, default=300)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    g, ctx = parse_global(args.global_type), parse_context(args.context)
    rows = []
    for seed in range(args.seeds):
        for name, probe in (("completeness", completeness_probe), ("soundness", soundness_probe)):
            rep = probe(ctx, g, steps=args.steps, seed=seed)
            rows.append({"seed": seed, "direction": name, **rep.to_json()})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    for r in rows:
        print(f"seed {r['seed']} {r['direction']:12s} {r['verdict']:12s} "
              f"steps={r['steps_checked']} states={r['states_explored']} regime={r['regime']}")


if __name__ == "__main__":
    main()
