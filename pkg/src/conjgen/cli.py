"""Command-line driver: generate, verify, group-check, data.

Exit codes: 0 success, 1 falsification found (or nothing emitted),
2 usage/config error, 3 resource error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from ._kernels import BACKEND
from .errors import ConfigError, EvaluationError, ResourceLimitError
from .function_space import (
    FeatureBasis,
    basis_from_dict,
    basis_to_dict,
    candidate_from_record,
    candidate_to_record,
    max_hook_argument,
)
from .group_algebra import smooth_p_grid, write_p_grid_csv
from .group_suite import run_group_suite
from .number_theory import build_pi_table, grid_dataset, write_pi_table_csv
from .oracle import OracleConfig, run_search, write_trajectory_csv
from .simple_groups import build_catalog, groups_dataset, write_catalog_csv
from .verifier import DomainSpec, verify

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path} is not valid JSON (line {exc.lineno}, column {exc.colno})"
        ) from exc


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"config is missing the {key!r} section")
    return cfg[key]


def _build_primes_dataset(dataset_cfg: dict, basis_doc: dict):
    ranges_cfg = _require(dataset_cfg, "ranges")
    variables = basis_doc.get("variables")
    if variables is None:
        raise ConfigError("basis must declare its variables")
    try:
        ranges = [(int(ranges_cfg[v][0]), int(ranges_cfg[v][1])) for v in variables]
    except KeyError as exc:
        raise ConfigError(f"dataset ranges are missing variable {exc}") from exc
    dataset = grid_dataset(
        ranges,
        sample_count=dataset_cfg.get("sample_count"),
        seed=int(dataset_cfg.get("seed", 0)),
        min_value=int(dataset_cfg.get("min_value", 2)),
    )
    # Size the table to the largest argument any hooked entry can see;
    # the stub table only lets the probe basis pass construction.
    probe = basis_from_dict(basis_doc, pi=build_pi_table(2))
    corner = [hi for _, hi in ranges]
    need = max_hook_argument(probe, corner)
    table = build_pi_table(max(2, math.floor(need))) if need is not None else None
    basis = basis_from_dict(basis_doc, pi=table)
    FeatureBasis.build(
        basis.entries, basis.d1, basis.d2, basis.variables,
        basis_id=basis.basis_id, pi=table, dataset=dataset,
    )
    return dataset, basis


def _build_dataset_and_basis(cfg: dict):
    dataset_cfg = _require(cfg, "dataset")
    basis_doc = _require(cfg, "basis")
    kind = dataset_cfg.get("kind")
    if kind == "primes":
        return _build_primes_dataset(dataset_cfg, basis_doc)
    if kind == "groups":
        dataset = groups_dataset(build_catalog())
        basis = basis_from_dict(basis_doc, pi=None)
        FeatureBasis.build(
            basis.entries, basis.d1, basis.d2, basis.variables,
            basis_id=basis.basis_id, pi=None, dataset=dataset,
        )
        return dataset, basis
    raise ConfigError(f"unknown dataset kind {kind!r} (expected primes or groups)")


def _write_manifest(out_dir: Path, command: str, config_path: str | None,
                    seed: int | None, outputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "config_path": config_path,
        "seed": seed,
        "outputs": sorted(str(p.relative_to(out_dir)) for p in outputs),
        "created": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "backend": BACKEND,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    dataset, basis = _build_dataset_and_basis(cfg)
    oracle_cfg = dict(cfg.get("oracle", {}))
    if args.seed is not None:
        oracle_cfg["seed"] = args.seed
    try:
        config = OracleConfig(**oracle_cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad oracle settings: {exc}") from exc

    result = run_search(config, dataset, basis, threads=args.threads)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []

    conj_path = out_dir / "conjectures.jsonl"
    with open(conj_path, "w", encoding="utf-8") as fh:
        for run in result.emitted:
            fh.write(json.dumps(candidate_to_record(run.result), sort_keys=True) + "\n")
    outputs.append(conj_path)

    reports_path = out_dir / "reports.jsonl"
    with open(reports_path, "w", encoding="utf-8") as fh:
        for run in result.emitted:
            fh.write(run.verification.to_json() + "\n")
    outputs.append(reports_path)

    bases_path = out_dir / "bases.json"
    with open(bases_path, "w", encoding="utf-8") as fh:
        json.dump({basis.basis_id: basis_to_dict(basis)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(bases_path)

    if cfg.get("emit_trajectories", True):
        traj_dir = out_dir / "trajectories"
        traj_dir.mkdir(exist_ok=True)
        for run in result.runs:
            path = traj_dir / f"restart_{run.restart_index:02d}.csv"
            write_trajectory_csv(path, run)
            outputs.append(path)

    _write_manifest(out_dir, "generate", args.config, config.seed, outputs)

    verified = result.verified()
    print(
        f"emitted {len(result.emitted)} candidate(s), "
        f"{len(verified)} verified, over {len(result.runs)} restart(s)"
    )
    for run in result.emitted:
        print(f"  [{run.verification.status}] {candidate_to_record(run.result)['text']}")
    return EXIT_OK if verified else EXIT_FALSIFIED


def _domain_for_verify(args):
    if args.dataset == "groups":
        return groups_dataset(build_catalog())
    if args.domain:
        spec = DomainSpec.parse(args.domain, args.filter or "")
        if args.samples:
            spec = DomainSpec(spec.ranges, spec.filters, args.samples,
                              args.seed if args.seed is not None else 0)
        return spec
    raise ConfigError("verify needs --domain or --dataset groups")


def _domain_corner(domain, variables) -> list[float]:
    """Upper corner of the domain, ordered like the basis variables."""
    if isinstance(domain, DomainSpec):
        his = {name: hi for name, _, hi in domain.ranges}
        return [float(his[v]) for v in variables]
    tops = dict(zip(domain.variables, domain.rows.max(axis=0)))
    return [float(tops[v]) for v in variables]


def cmd_verify(args) -> int:
    conj_path = Path(args.conjectures)
    bases_path = Path(args.bases) if args.bases else conj_path.parent / "bases.json"
    try:
        with open(bases_path, encoding="utf-8") as fh:
            bases_doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read bases file {bases_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bases file is not valid JSON: {exc}") from exc

    try:
        lines = conj_path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {conj_path}: {exc}") from exc

    records = []
    for ln, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append((ln, json.loads(line)))
        except json.JSONDecodeError as exc:
            print(f"error: line {ln}: not valid JSON ({exc})", file=sys.stderr)
            return EXIT_USAGE

    domain = _domain_for_verify(args)
    needs_pi = any(
        e.get("hook") for doc in bases_doc.values() for e in doc["entries"]
    )
    table = None
    falsified = 0
    out_fh = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for ln, rec in records:
            doc = bases_doc.get(rec.get("basis_id"))
            if doc is None:
                print(f"error: line {ln}: unknown basis_id {rec.get('basis_id')!r}",
                      file=sys.stderr)
                return EXIT_USAGE
            basis = basis_from_dict(doc, pi=build_pi_table(2) if needs_pi else None)
            if needs_pi:
                need = max_hook_argument(basis, _domain_corner(domain, basis.variables))
                if need is not None:
                    if table is None or table.limit < need:
                        table = build_pi_table(max(2, math.floor(need)))
                    basis = basis_from_dict(doc, pi=table)
            try:
                candidate = candidate_from_record(rec, basis)
            except (KeyError, ValueError) as exc:
                print(f"error: line {ln}: bad candidate record: {exc}", file=sys.stderr)
                return EXIT_USAGE
            report = verify(candidate, domain, threads=args.threads)
            if report.status == "Falsified":
                falsified += 1
            out_fh.write(report.to_json() + "\n")
    finally:
        if args.out:
            out_fh.close()
    return EXIT_FALSIFIED if falsified else EXIT_OK


def cmd_group_check(args) -> int:
    if args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    results = run_group_suite(args.trials, args.seed if args.seed is not None else 0)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{status}  {r.name:<{width}}"
        if r.detail:
            line += f"  {r.detail}"
        print(line)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_FALSIFIED


def cmd_data(args) -> int:
    out = Path(args.out) if args.out else None
    if args.kind == "primes":
        table = build_pi_table(args.limit)
        path = out or Path("pi_table.csv")
        write_pi_table_csv(path, table)
    elif args.kind == "groups":
        catalog = build_catalog()
        path = out or Path("catalog.csv")
        write_catalog_csv(path, catalog)
    elif args.kind == "figure1-grid":
        grid = smooth_p_grid(
            (args.a_min, args.a_max), (args.b_min, args.b_max),
            args.resolution, args.sharpness,
        )
        path = out or Path("figure1_grid.csv")
        write_p_grid_csv(path, grid)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown data kind {args.kind!r}")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conjgen",
        description="Generate and verify conjectured inequalities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="run the descent search from a JSON config")
    p_gen.add_argument("--config", required=True, help="JSON run configuration")
    p_gen.add_argument("--out", default="out", help="output directory")
    p_gen.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_gen.add_argument("--threads", type=int, default=1)
    p_gen.set_defaults(func=cmd_generate)

    p_ver = sub.add_parser("verify", help="verify conjecture records over a domain")
    p_ver.add_argument("conjectures", help="JSON-lines conjecture file")
    p_ver.add_argument("--bases", default=None,
                       help="bases JSON (default: bases.json next to the input)")
    p_ver.add_argument("--domain", default=None, help='e.g. "a=2..2000,b=2..2000"')
    p_ver.add_argument("--filter", default=None, help='e.g. "a<=b"')
    p_ver.add_argument("--samples", type=int, default=None,
                       help="sampled scan size instead of exhaustive")
    p_ver.add_argument("--dataset", choices=["groups"], default=None,
                       help="verify over a built-in dataset")
    p_ver.add_argument("--seed", type=int, default=None)
    p_ver.add_argument("--threads", type=int, default=1)
    p_ver.add_argument("--out", default=None, help="write reports here instead of stdout")
    p_ver.set_defaults(func=cmd_verify)

    p_grp = sub.add_parser("group-check", help="run the randomized group-law suite")
    p_grp.add_argument("--trials", type=int, default=1000)
    p_grp.add_argument("--seed", type=int, default=0)
    p_grp.set_defaults(func=cmd_group_check)

    p_dat = sub.add_parser("data", help="emit datasets as CSV")
    p_dat.add_argument("--kind", required=True,
                       choices=["primes", "groups", "figure1-grid"])
    p_dat.add_argument("--limit", type=int, default=100, help="pi table limit")
    p_dat.add_argument("--a-min", type=float, default=-2.0)
    p_dat.add_argument("--a-max", type=float, default=2.0)
    p_dat.add_argument("--b-min", type=float, default=-2.0)
    p_dat.add_argument("--b-max", type=float, default=2.0)
    p_dat.add_argument("--resolution", type=int, default=101)
    p_dat.add_argument("--sharpness", type=float, default=6.0)
    p_dat.add_argument("--out", default=None)
    p_dat.set_defaults(func=cmd_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
