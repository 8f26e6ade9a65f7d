"""Command-line front end: scheme inspection, admissibility checks, square
roots, graph generation, and ensemble statistics.

Subcommands
-----------
schemes
    List the built-in schemes, their relation names in order, and the
    minimum vertex count.

validate --config cfg.json
    Parse a run configuration, check the coherence axioms at a reduced
    vertex count, and report the covariance eigenvalues and its
    positive-definiteness verdict.

sqrt --config cfg.json
    Print the square-root coefficients and the verification residual as
    JSON.

generate --config cfg.json --out DIR [--seed S] [--realizations R]
         [--threads T] [--pbm]
    Write one edge-list CSV per realization plus a manifest; deterministic
    for a fixed seed regardless of the thread count.

census --config manifest.json [--out DIR]
    Aggregate motif censuses, the reciprocal summary and degree histograms
    over the files of a generated ensemble.

Exit codes: 0 success, 1 usage or configuration error, 2 admissibility or
axiom failure, 3 I/O failure.  The environment variable SONETS_DENSE_CAP
overrides the edge cap of the dense matvec fallback.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (
    AlgebraElement,
    balance_disjoint,
    element_from_map,
    multiply_elements,
    spectral_summary,
    sqrt_in_algebra,
)
from .errors import (
    AdmissibilityError,
    AxiomViolationError,
    CapExceededError,
    ConfigurationError,
    SonetsError,
)
from .sampling import (
    GraphSampler,
    SamplerConfig,
    read_edge_list,
    write_edge_list,
    write_pbm,
)
from .schemes import (
    BUILTIN_SCHEMES,
    NykampZhaoScheme,
    Scheme,
    make_scheme,
    verify_axioms,
)
from .stats import (
    census_to_csv,
    degree_histogram,
    histogram_to_csv,
    mean_census,
    motif_census,
    summary_to_csv,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """A generation run: scheme, covariance coefficients by relation name,
    thresholding probability, seeding and ensemble size."""

    scheme: str
    n: int
    coefficients: dict
    edge_probability: float = 0.1
    seed: int = 0
    realizations: int = 1
    balance_target: float | None = None
    output_dir: str | None = None

    def to_json_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["N"] = data.pop("n")
        return data


def load_run_config(path) -> RunConfig:
    """Parse a JSON run configuration, with line context on parse errors."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a JSON object")
    missing = {"scheme"} - set(data)
    if missing:
        raise ConfigurationError(f"{path}: missing required key(s) {sorted(missing)}")
    if "N" not in data and "n" not in data:
        raise ConfigurationError(f"{path}: missing required key 'N'")
    try:
        return RunConfig(
            scheme=str(data["scheme"]),
            n=int(data.get("N", data.get("n"))),
            coefficients=dict(data.get("coefficients", {})),
            edge_probability=float(data.get("edge_probability", 0.1)),
            seed=int(data.get("seed", 0)),
            realizations=int(data.get("realizations", 1)),
            balance_target=(
                None
                if data.get("balance_target") is None
                else float(data["balance_target"])
            ),
            output_dir=data.get("output_dir"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def covariance_from_config(config: RunConfig) -> tuple[Scheme, AlgebraElement]:
    """Build the (optionally balanced) covariance element of a run.

    The identity coefficient defaults to 1; for the directed scheme the
    anti-chain coefficient defaults to the chain coefficient (a symmetric
    covariance), and giving both with different values is rejected.
    """
    scheme = make_scheme(config.scheme, config.n)
    coefficients = dict(config.coefficients)
    if isinstance(scheme, NykampZhaoScheme):
        chain_keys = [k for k in coefficients if _norm(k) == "chain"]
        anti_keys = [k for k in coefficients if _norm(k) in ("anti", "anti-chain", "antichain")]
        if chain_keys and anti_keys:
            if coefficients[chain_keys[0]] != coefficients[anti_keys[0]]:
                raise ConfigurationError(
                    "chain and anti-chain coefficients must match "
                    "(the covariance must be symmetric)"
                )
        elif chain_keys:
            coefficients["anti-chain"] = coefficients[chain_keys[0]]
        elif anti_keys:
            coefficients["chain"] = coefficients[anti_keys[0]]
    cov = element_from_map(scheme, coefficients, identity_default=1.0)
    if config.balance_target is not None:
        cov = balance_disjoint(cov, config.balance_target)
    return scheme, cov


def _norm(name: str) -> str:
    return name.strip().lower().replace("_", "-")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_schemes(args) -> int:
    for name in sorted(BUILTIN_SCHEMES):
        cls = BUILTIN_SCHEMES[name]
        print(f"{name}  (minimum N = {cls.min_vertices})")
        print(f"  relations: {', '.join(cls.relation_names)}")
    return 0


def cmd_validate(args) -> int:
    config = load_run_config(args.config)
    scheme, cov = covariance_from_config(config)

    axiom_n = max(min(scheme.n, 8), type(scheme).min_vertices)
    report = verify_axioms(make_scheme(config.scheme, axiom_n))
    summary = spectral_summary(cov)

    print(f"configuration: {args.config}")
    if axiom_n != scheme.n:
        print(f"axioms checked at reduced N = {axiom_n} (classifier formulas "
              f"do not depend on N)")
    print(report)
    print("eigenvalues:")
    for value, mult in zip(summary.eigenvalues, summary.multiplicities):
        mult_text = "?" if mult is None else str(mult)
        print(f"  {value: .12g}  (multiplicity {mult_text})")
    verdict = (
        "positive definite"
        if summary.positive_definite
        else ("positive semidefinite" if summary.admissible else "NOT admissible")
    )
    print(f"covariance: {verdict}")

    payload = {
        "config": config.to_json_dict(),
        "axioms": {
            "checked_n": axiom_n,
            "coherent": report.is_coherent,
            "homogeneous": report.is_homogeneous,
        },
        "eigenvalues": list(summary.eigenvalues),
        "multiplicities": list(summary.multiplicities),
        "positive_definite": summary.positive_definite,
        "admissible": summary.admissible,
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "validate.json").write_text(json.dumps(payload, indent=2) + "\n")
    if not report.is_coherent or not summary.admissible:
        return 2
    return 0


def cmd_sqrt(args) -> int:
    config = load_run_config(args.config)
    scheme, cov = covariance_from_config(config)
    beta = sqrt_in_algebra(cov)
    residual = float(
        np.max(np.abs(multiply_elements(beta, beta).vector - cov.vector))
    )
    payload = {
        "scheme": scheme.name,
        "N": scheme.n,
        "covariance": dict(zip(scheme.relation_names, cov.coeffs)),
        "sqrt_coefficients": dict(zip(scheme.relation_names, beta.coeffs)),
        "residual": residual,
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_generate(args) -> int:
    config = load_run_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.realizations is not None:
        config = dataclasses.replace(config, realizations=args.realizations)
    out = args.out or config.output_dir
    if out is None:
        raise _UsageError("no output directory (--out or config output_dir)")

    scheme, cov = covariance_from_config(config)
    sampler_config = SamplerConfig(
        scheme=scheme,
        cov=cov,
        edge_probability=config.edge_probability,
        seed=config.seed,
        realizations=config.realizations,
    )
    sampler = GraphSampler(sampler_config)  # admissibility checked before any I/O

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(max(config.realizations - 1, 0))))
    edge_files = []
    pbm_files = []

    def produce(index: int) -> None:
        sample = sampler.sample(index)
        write_edge_list(sample, out_dir / edge_files[index])
        if args.pbm:
            write_pbm(sample, out_dir / pbm_files[index])

    for index in range(config.realizations):
        edge_files.append(f"edges_{index:0{width}d}.csv")
        if args.pbm:
            pbm_files.append(f"sample_{index:0{width}d}.pbm")

    if args.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
            list(pool.map(produce, range(config.realizations)))
    else:
        for index in range(config.realizations):
            produce(index)

    manifest = config.to_json_dict()
    manifest["output_dir"] = str(out_dir)
    manifest["derived"] = {
        "version": __version__,
        "threshold": sampler.threshold,
        "sqrt_coefficients": dict(
            zip(scheme.relation_names, sampler.sqrt_element.coeffs)
        ),
        "edge_files": edge_files,
        "pbm_files": pbm_files,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {config.realizations} realizations to {out_dir}")
    return 0


def cmd_census(args) -> int:
    manifest_path = Path(args.config)
    config = load_run_config(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError:
        manifest = {}
    scheme = make_scheme(config.scheme, config.n)

    base = manifest_path.parent
    names = manifest.get("derived", {}).get("edge_files")
    if names:
        files = [base / name for name in names]
    else:
        files = sorted(base.glob("edges_*.csv"))
    if not files:
        raise _UsageError(f"no edge-list files found for {manifest_path}")

    samples = [read_edge_list(path, scheme) for path in files]
    censuses = [motif_census(sample) for sample in samples]
    mean = mean_census(censuses)

    out_dir = Path(args.out) if args.out else base
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "census.csv").write_text(census_to_csv(mean))
    if mean.summary is not None:
        (out_dir / "summary.csv").write_text(summary_to_csv(mean.summary))
    directions = ("in", "out") if isinstance(scheme, NykampZhaoScheme) else ("undirected",)
    for direction in directions:
        for cls, hist in degree_histogram(samples, direction).items():
            suffix = "" if cls == "all" else f"_{cls}"
            (out_dir / f"degree_{direction}{suffix}.csv").write_text(
                histogram_to_csv(hist)
            )
    print(f"census over {len(files)} realizations written to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="sonets", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    sub.add_parser("schemes", help="list built-in schemes").set_defaults(
        func=cmd_schemes
    )

    p_validate = sub.add_parser("validate", help="check axioms and admissibility")
    p_validate.add_argument("--config", required=True, help="run configuration JSON")
    p_validate.add_argument("--out", help="directory for validate.json")
    p_validate.set_defaults(func=cmd_validate)

    p_sqrt = sub.add_parser("sqrt", help="square-root coefficients as JSON")
    p_sqrt.add_argument("--config", required=True)
    p_sqrt.set_defaults(func=cmd_sqrt)

    p_generate = sub.add_parser("generate", help="sample an ensemble to disk")
    p_generate.add_argument("--config", required=True)
    p_generate.add_argument("--out", help="output directory")
    p_generate.add_argument("--seed", type=int, help="override config seed")
    p_generate.add_argument(
        "--realizations", type=int, help="override config realization count"
    )
    p_generate.add_argument("--threads", type=int, default=1)
    p_generate.add_argument(
        "--pbm", action="store_true", help="also write adjacency pixel dumps"
    )
    p_generate.set_defaults(func=cmd_generate)

    p_census = sub.add_parser("census", help="motif and degree statistics")
    p_census.add_argument(
        "--config", required=True, help="manifest.json of a generated ensemble"
    )
    p_census.add_argument("--out", help="output directory (default: input dir)")
    p_census.set_defaults(func=cmd_census)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except _UsageError as exc:
        print(f"sonets: {exc}", file=sys.stderr)
        return 1
    except ConfigurationError as exc:
        print(f"sonets: configuration error: {exc}", file=sys.stderr)
        return 1
    except (AdmissibilityError, AxiomViolationError) as exc:
        print(f"sonets: {exc}", file=sys.stderr)
        return 2
    except CapExceededError as exc:
        print(f"sonets: {exc}", file=sys.stderr)
        return 1
    except SonetsError as exc:
        print(f"sonets: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"sonets: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
