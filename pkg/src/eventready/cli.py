"""Command-line front end.

Exit codes: 0 success, 1 error (bad config, unknown preset, I/O), 2 when
a check-style preset misses its acceptance threshold.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, parse_config, schema_json
from .presets import (
    PRESET_NAMES,
    PresetError,
    evaluate_config,
    run_preset,
    scan,
    write_csv,
    write_json,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventready",
        description="Simulate event-ready entangled-pair experiments.",
    )
    what = parser.add_mutually_exclusive_group(required=False)
    what.add_argument("--preset", choices=PRESET_NAMES, help="built-in experiment to run")
    what.add_argument("--config", type=Path, help="JSON experiment config file")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="sampling seed")
    parser.add_argument("--shots", type=int, default=None, help="samples per point (0 = analytic)")
    parser.add_argument(
        "--scan",
        metavar="PATH=START:STOP:STEP",
        default=None,
        help="scan a numeric config field, e.g. elements.0.delta_um=-600:600:1",
    )
    parser.add_argument(
        "--convention",
        choices=["perm", "i-reflect"],
        default=None,
        help="polarizing-beamsplitter reflection phase convention",
    )
    parser.add_argument("--format", choices=["json", "csv"], default="json", dest="fmt")
    parser.add_argument("--print-schema", action="store_true", help="print the config schema and exit")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_schema:
        print(schema_json())
        return 0
    if not args.preset and not args.config:
        parser.print_usage(sys.stderr)
        print("eventready: error: one of --preset or --config is required", file=sys.stderr)
        return 1
    try:
        if args.config:
            config = parse_config(args.config)
            if args.convention:
                raw = config.to_dict()
                raw["convention"] = args.convention
                config = ExperimentConfig.from_dict(raw)
            if args.scan:
                path, _, range_spec = args.scan.partition("=")
                if not range_spec:
                    print("eventready: error: --scan needs PATH=START:STOP:STEP", file=sys.stderr)
                    return 1
                rows = scan(config, path, range_spec)
                columns = list(rows[0].keys())
                for row in rows[1:]:
                    columns.extend(k for k in row if k not in columns)
                if args.out:
                    args.out.mkdir(parents=True, exist_ok=True)
                    target = args.out / "scan.csv"
                    write_csv(target, columns, rows)
                    print(f"wrote {target}")
                else:
                    from .presets import _format_cell

                    print(",".join(columns))
                    for row in rows:
                        print(",".join(_format_cell(row.get(c, "")) for c in columns))
                return 0
            observables = evaluate_config(config)
            if args.out:
                args.out.mkdir(parents=True, exist_ok=True)
                target = args.out / "observables.json"
                write_json(target, observables)
                print(f"wrote {target}")
            else:
                for key, value in observables.items():
                    print(f"{key} = {value}")
            return 0
        overrides = {}
        result = run_preset(
            args.preset,
            overrides=overrides,
            out_dir=args.out,
            seed=args.seed,
            shots=args.shots,
            convention=args.convention,
            fmt=args.fmt,
        )
        if args.out is None:
            write_json_stdout(result.report)
        else:
            for path in result.files:
                print(f"wrote {path}")
        if result.exit_code == 2:
            print(f"eventready: check failed for preset {args.preset}", file=sys.stderr)
        return result.exit_code
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"eventready: config error: {violation}", file=sys.stderr)
        return 1
    except (PresetError, OSError, ValueError) as exc:
        print(f"eventready: error: {exc}", file=sys.stderr)
        return 1


def write_json_stdout(report: dict):
    import json

    print(json.dumps(report, indent=2, sort_keys=True))


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
