"""Command-line entry point: run one scheme, compare all, or print learner dumps."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .control import normalize_scheme
from .runner import compare_schemes, run_scenario


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    scheme = normalize_scheme(args.scheme)
    artifacts = run_scenario(cfg, scheme, args.out, figures=not args.no_figures)
    for path in (artifacts.slots_csv, artifacts.summary, artifacts.per_load,
                 artifacts.bandit_dump, *artifacts.figures):
        if path is not None:
            print(f"wrote {path}")
    return 0


def _cmd_compare(args) -> int:
    cfg = load_config(args.config)
    rows, _, comparison_path = compare_schemes(cfg, args.out, figures=not args.no_figures)
    header = f"{'scheme':<8} {'qos':>6} {'ul_prbs':>8} {'dl_prbs':>8} {'gpu_mhz':>8} {'ue_sav':>7} {'bs_sav':>7}"
    print(header)
    for r in rows:
        print(f"{r.scheme:<8} {100 * r.qos_ratio:>5.1f}% {r.avg_ul_prbs:>8.1f} "
              f"{r.avg_dl_prbs:>8.1f} {r.avg_gpu_mhz:>8.1f} "
              f"{100 * r.ue_savings:>6.1f}% {100 * r.bs_savings:>6.1f}%")
    print(f"wrote {comparison_path}")
    return 0


def _cmd_dump_bandit(args) -> int:
    out = Path(args.out_dir)
    if not out.is_dir():
        raise ConfigError(f"{out} is not a directory")
    dumps = sorted(out.glob("*_bandit.txt"))
    if not dumps:
        raise ConfigError(f"no learner dumps (*_bandit.txt) found in {out}")
    for path in dumps:
        print(f"==> {path.name} <==")
        print(path.read_text(), end="")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mecadapt",
        description="Simulate a three-hop edge pipeline under slot-level resource control.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scheme on a scenario file")
    p_run.add_argument("config", help="scenario JSON file")
    p_run.add_argument("--scheme", required=True, help="static, tcp, ucb1, or mucb1")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run every configured scheme on shared traffic")
    p_cmp.add_argument("config", help="scenario JSON file")
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_cmp.set_defaults(func=_cmd_compare)

    p_dump = sub.add_parser("dump-bandit", help="print learner dumps from a run directory")
    p_dump.add_argument("out_dir", help="directory holding *_bandit.txt files")
    p_dump.set_defaults(func=_cmd_dump_bandit)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
