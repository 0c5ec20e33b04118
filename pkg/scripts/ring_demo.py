"""Walk the ring protocol end to end: project, associate, check, simulate."""
import argparse
from pathlib import Path

from sessionforge import parse_global, print_type
from sessionforge.association import associated
from sessionforge.frontend.cli import load_manifest
from sessionforge.process import explain_session, run_fair
from sessionforge.projection import project, projected_context
from sessionforge.properties import check_all

PROTO = Path(__file__).resolve().parent.parent / "protocols"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    g = parse_global((PROTO / "ring.gt").read_text())
    print("global:", print_type(g))
    for r in "pqr":
        print(f"  {r}:", print_type(project(g, r).local))
    ctx = projected_context(g)
    print("associated:", associated(ctx, g))
    for name, v in check_all(ctx).items():
        print(f"  {name}: {v.holds}")

    _, session = load_manifest(str(PROTO / "ring.yaml"))
    print("session typing:", explain_session(session, g).verdict)
    res = run_fair(session, args.steps, args.seed)
    for t in res.trace[:12]:
        print(f"  {t['step']:3d} {t['role']} {t['rule']:9s} {t['label'] or ''}")
    print(f"run: {res.verdict} after {res.steps} steps, max queue {res.max_queue}")


if __name__ == "__main__":
    main()
