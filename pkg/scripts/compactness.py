"""Show the constant-size subtype of the a^n.b chains and the windows used."""
import argparse

from sessionforge import parse_local
from sessionforge.subtyping import async_subtype_check, sync_subtype

COMPACT = "rec t . p & { a . t, b . end }"


def chain(n: int) -> str:
    body = "p & { b . end }"
    for _ in range(n):
        body = f"p & {{ a . {body} }}"
    return body


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=8)
    ap.add_argument("--bound", type=int, default=2)
    args = ap.parse_args()
    sub = parse_local(COMPACT)
    print(f"{'n':>3} {'size':>5} {'sync':>5} {'async':>8} window")
    for n in range(1, args.max_n + 1):
        sup = parse_local(chain(n))
        res = async_subtype_check(sub, sup, args.bound)
        print(f"{n:>3} {n + 1:>5} {str(sync_subtype(sub, sup)):>5} {str(res.verdict):>8} {res.window}")


if __name__ == "__main__":
    main()
