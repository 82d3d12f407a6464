"""Command-line front end: ``validate``, ``bench``, ``bias`` and ``synth``.

Exit codes: 0 success, 1 model failure at run time, 2 input or config error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import BIAS_DETECTORS, MODEL_NAMES, PREDICTORS, build_model, load_config, validate_config_keys
from .core import (
    dataset_errors,
    group_session_rows,
    load_dataset,
    load_schema,
    load_sessions,
    read_csv,
    save_dataset,
    save_schema,
    save_sessions,
    session_errors,
    validate_dataset,
)
from .evaluation import KAPPAS, parse_groups, run_benchmark, run_bias, summarize, write_jsonl, write_summary
from .exceptions import ReplayError, ValidationError
from .synthetic import TaskSpec, gen_dataset, gen_sessions, save_ground_truth, standard_schema

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


def _existing(path, what):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} file not found: {p}")
    return p


def _load_inputs(args):
    schema = load_schema(_existing(args.schema, "schema"))
    dataset = load_dataset(_existing(args.data, "dataset"), schema)
    sessions = load_sessions(_existing(args.sessions, "sessions"), dataset)
    return dataset, sessions


def _config(args):
    config = load_config(_existing(args.config, "config")) if args.config else {}
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--set expects key=value, got {item!r}")
        try:
            config[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            config[key.strip()] = value
    validate_config_keys(config)
    return config


def _models(args, allowed, config):
    names = [m.strip() for m in args.models.split(",") if m.strip()]
    if not names:
        raise InputError("--models is empty")
    for n in names:
        if n not in MODEL_NAMES:
            raise InputError(f"unknown model {n!r}; choose from {', '.join(MODEL_NAMES)}")
        if n not in allowed:
            raise InputError(f"model {n!r} cannot be used for this command")
    return {n: build_model(n, config, args.seed) for n in names}


def _write_manifest(out, files, complete, error=None):
    manifest = {"complete": complete, "files": files}
    if error:
        manifest["error"] = error
    with open(out / "MANIFEST.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


# -- commands -------------------------------------------------------------------


def cmd_validate(args):
    problems = []
    try:
        schema = load_schema(_existing(args.schema, "schema"))
        rows = read_csv(_existing(args.data, "dataset"))
    except (InputError, ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}")
        return EXIT_INPUT
    if rows and next(iter(rows[0])) != "point_id":
        problems.append(f"{args.data}: first column must be 'point_id'")
    problems += [f"{args.data}: {e}" for e in dataset_errors(rows, schema)]
    if args.sessions:
        if problems:
            problems.append(f"{args.sessions}: not checked because the dataset is invalid")
        else:
            try:
                srows = read_csv(_existing(args.sessions, "sessions"))
                dataset = validate_dataset(rows, schema)
                for sid, group in group_session_rows(srows).items():
                    errs, _ = session_errors(group, dataset)
                    problems += [f"{args.sessions}: session {sid!r}: {e}" for e in errs]
            except (InputError, ValidationError, OSError) as exc:
                problems.append(str(exc))
    for p in problems:
        print(p)
    if problems:
        print(f"{len(problems)} problem(s) found")
        return EXIT_INPUT
    print("ok")
    return EXIT_OK


def _print_table(summary):
    kappas = summary["kappas"]
    header = f"{'model':<8}" + "".join(f"{'@' + str(k):>8}" for k in kappas) + f"{'rank':>10}"
    print(header)
    for name, m in summary["models"].items():
        cells = "".join(f"{m['success'][str(k)]:>8.3f}" for k in kappas)
        print(f"{name:<8}{cells}{m['mean_rank']:>10.1f}")


def cmd_bench(args):
    dataset, sessions = _load_inputs(args)
    config = _config(args)
    kappas = tuple(sorted({int(k) for k in args.kappa.split(",")}))
    if not kappas or kappas[0] < 1:
        raise InputError("--kappa values must be positive integers")
    models = _models(args, PREDICTORS, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    name = Path(args.data).stem
    records = []
    for model_name, model in models.items():
        try:
            records += run_benchmark(dataset, sessions, {model_name: model}, kappas, args.jobs)
        except ReplayError as exc:
            write_jsonl(records, out / "records.jsonl")
            if records:
                write_summary(summarize(records, kappas, name), out / "summary.json", out / "summary.csv")
            files = ["records.jsonl"] + (["summary.json", "summary.csv"] if records else [])
            _write_manifest(out, files, False, f"model {model_name!r}: {exc}")
            print(f"error: model {model_name!r} failed: {exc}", file=sys.stderr)
            return EXIT_MODEL
    summary = summarize(records, kappas, name)
    write_jsonl(records, out / "records.jsonl")
    write_summary(summary, out / "summary.json", out / "summary.csv")
    _write_manifest(out, ["records.jsonl", "summary.json", "summary.csv"], True)
    _print_table(summary)
    return EXIT_OK


def cmd_bias(args):
    dataset, sessions = _load_inputs(args)
    config = _config(args)
    models = _models(args, BIAS_DETECTORS, config)
    groups = parse_groups(args.groups) if args.groups else None
    if groups:
        known = set(dataset.names)
        for g, members in groups.items():
            missing = [m for m in members if m not in known]
            if missing:
                raise InputError(f"group {g!r}: unknown attributes {missing}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for model_name, model in models.items():
        try:
            records += run_bias(dataset, sessions, {model_name: model}, groups, args.jobs)
        except ReplayError as exc:
            write_jsonl(records, out / "bias_timeline.jsonl")
            _write_manifest(out, ["bias_timeline.jsonl"], False, f"model {model_name!r}: {exc}")
            print(f"error: model {model_name!r} failed: {exc}", file=sys.stderr)
            return EXIT_MODEL
    write_jsonl(records, out / "bias_timeline.jsonl")
    _write_manifest(out, ["bias_timeline.jsonl"], True)
    print(f"wrote {len(records)} timeline records to {out / 'bias_timeline.jsonl'}")
    return EXIT_OK


def _parse_focus(spec, schema):
    kinds = {a.name: a for a in schema}
    focus = {}
    for entry in filter(None, (e.strip() for e in spec.split(","))):
        name, sep, target = entry.partition("=")
        if not sep or name not in kinds:
            raise InputError(f"bad focus entry {entry!r}; expected attr=category or attr=low:high")
        if kinds[name].is_continuous:
            lo, _, hi = target.partition(":")
            try:
                focus[name] = (float(lo), float(hi))
            except ValueError:
                raise InputError(f"bad interval {target!r} for {name!r}") from None
        else:
            focus[name] = target
    if not focus:
        raise InputError("--focus is empty")
    return focus


def cmd_synth(args):
    schema = load_schema(_existing(args.schema, "schema")) if args.schema else standard_schema()
    dataset = gen_dataset(args.n, schema, args.seed)
    task = TaskSpec(
        focus=_parse_focus(args.focus, schema),
        eta=args.eta,
        length=args.length,
        n_sessions=args.n_sessions,
        seed=args.seed + 1,
        action=args.action,
    )
    sessions = gen_sessions(dataset, task)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_schema(schema, out / "schema.json")
    save_dataset(dataset, out / "dataset.csv")
    save_sessions(sessions, out / "sessions.csv")
    save_ground_truth(task, out / "ground_truth.json")
    print(f"wrote {dataset.n} points and {len(sessions)} sessions to {out}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def _add_inputs(p):
    p.add_argument("--data", required=True, help="dataset CSV (first column point_id)")
    p.add_argument("--schema", required=True, help="schema JSON")
    p.add_argument("--sessions", required=True, help="sessions CSV (session_id,t,point_id,action)")


def _add_run(p, default_models):
    p.add_argument("--models", default=default_models, help="comma-separated model names")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON config with dotted namespaces")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--out", default="out")
    p.add_argument("--jobs", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="usermodel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check dataset, schema and sessions files")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--sessions")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="replay sessions and score next-interaction prediction")
    _add_inputs(p)
    _add_run(p, ",".join(PREDICTORS))
    p.add_argument("--kappa", default=",".join(map(str, KAPPAS)))
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bias", help="emit per-step bias timelines")
    _add_inputs(p)
    _add_run(p, ",".join(BIAS_DETECTORS))
    p.add_argument("--groups", help="e.g. location=lon+lat,type,mixed=lon+lat+type")
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("synth", help="generate a synthetic dataset and biased sessions")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--schema", help="schema JSON (default: x, y, type, shift)")
    p.add_argument("--focus", required=True, help="e.g. type=type3 or type=type3,x=0.2:0.4")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--length", type=int, default=20)
    p.add_argument("--n-sessions", type=int, default=30)
    p.add_argument("--action", default="click")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="synth")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, ValidationError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
