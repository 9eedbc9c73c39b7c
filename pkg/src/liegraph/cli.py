"""Command-line driver: every pipeline as a reproducible command writing CSV or JSON."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import circuits, crystal, gaussian, moments, poisson, rankone, rootdata, spectra
from .errors import AdvisoryError, ConfigurationError, NumericalError, OutOfRangeError
from .geometry import SpaceSpec, build_geometric_graph, parse_space, poisson_level
from .util import content_hash, make_rng, worker_count

__all__ = ["ExperimentConfig", "COMMANDS", "run", "main", "build_parser"]

POISSON_COMMANDS = ("simulate-poisson", "moments")
GAUSSIAN_COMMANDS = ("limit-spectrum", "simulate-gaussian", "rankone-table")

# flags each command understands; anything else given on the command line is rejected
_COMMON = {"seed", "out", "format", "plot"}
ALLOWED = {
    "limit-spectrum": {"space", "family", "n", "L", "cutoff", "top"},
    "simulate-gaussian": {"space", "family", "n", "L", "N", "trials", "cutoff", "top"},
    "rankone-table": {"space", "n", "L", "top"},
    "simulate-poisson": {"space", "family", "n", "ell", "N", "trials", "s", "radius"},
    "circuit-table": {"s"},
    "moments": {"space", "ell", "s", "trials"},
    "lr": {"family", "lam", "mu", "t"},
    "volumes": {"family", "n"},
}
COMMANDS = tuple(ALLOWED)

DEFAULT_VOLUME_GROUPS = (("A", 1), ("A", 2), ("A", 3), ("B", 2), ("C", 2), ("C", 3), ("D", 3), ("D", 4))
_FAMILY_SPACE = {"A": "su", "B": "so", "C": "usp", "D": "so"}


@dataclass
class ExperimentConfig:
    """Everything a command needs; serializes to a flat dict and back."""

    command: str
    regime: str = "none"
    space: str | None = None
    family: str | None = None
    n: int | None = None
    N: int | None = None
    L: float | None = None
    ell: float | None = None
    trials: int | None = None
    seed: int = 0
    cutoff: float | None = None
    top: int | None = None
    s: int | None = None
    radius: int | None = None
    lam: str | None = None
    mu: str | None = None
    t: str | None = None
    out: str | None = None
    format: str = "csv"
    plot: bool = False

    def __post_init__(self):
        if self.command not in ALLOWED:
            raise ConfigurationError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.command in POISSON_COMMANDS:
            self.regime = "poisson"
        elif self.command in GAUSSIAN_COMMANDS:
            self.regime = "gaussian"
        else:
            self.regime = "none"
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"--format must be csv or json, got {self.format!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def embedded(self) -> dict:
        """The part of the config that determines the result (no output location)."""
        d = self.to_dict()
        for key in ("out", "format", "plot"):
            d.pop(key)
        return d

    # ---- derived quantities

    def space_spec(self, default: str | None = None) -> SpaceSpec:
        if self.space is not None and self.family is not None:
            raise ConfigurationError("give either --space or --family/--n, not both")
        if self.space is not None:
            return parse_space(self.space)
        if self.family is not None:
            fam = self.family.upper()
            if fam not in _FAMILY_SPACE or self.n is None:
                raise ConfigurationError("--family needs one of A, B, C, D together with --n")
            kind = _FAMILY_SPACE[fam]
            size = {"A": self.n + 1, "B": 2 * self.n + 1, "C": self.n, "D": 2 * self.n}[fam]
            return SpaceSpec(kind, size)
        if default is None:
            raise ConfigurationError(f"{self.command} needs --space (for example --space su2)")
        return parse_space(default)

    def level(self, space: SpaceSpec) -> float:
        """Connection level: L itself (Gaussian regime) or L_N = (ell/N)^(1/dim) (Poisson regime)."""
        if self.regime == "poisson":
            if self.L is not None:
                raise ConfigurationError("the Poisson regime derives L from --ell and --N; drop --L")
            if self.ell is None or self.N is None:
                raise ConfigurationError("the Poisson regime needs both --ell and --N")
            return poisson_level(space, self.N, self.ell)
        if self.L is None:
            raise ConfigurationError(f"{self.command} needs --L (connection level, 0 < L < pi)")
        return float(self.L)


# ------------------------------------------------------------------ helpers

def _parse_weight(text: str | None, flag: str) -> tuple[int, ...]:
    if text is None:
        raise ConfigurationError(f"lr needs {flag} (comma-separated fundamental coordinates, e.g. 2,1)")
    try:
        return tuple(int(v) for v in re.split(r"[,\s]+", text.strip()) if v)
    except ValueError as exc:
        raise ConfigurationError(f"{flag} must be integers separated by commas, got {text!r}") from exc


def _rank_one(text: str | None, n: int | None) -> rankone.RankOneSpace:
    if text is None:
        raise ConfigurationError("rankone-table needs --space (sphere2, rp2, cp2, hp2 or op2)")
    m = re.fullmatch(r"([a-z]+?)(\d*)", text.strip().lower())
    if m is None:
        raise ConfigurationError(f"cannot parse rank-one space {text!r}")
    kind, digits = m.group(1), m.group(2)
    if kind == "op" and digits == "2":
        return rankone.rank_one_space("op2")
    dim = int(digits) if digits else (n if n is not None else 2)
    return rankone.rank_one_space(kind, dim)


def _require(cfg: ExperimentConfig, *names: str):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigurationError(f"{cfg.command} needs " + ", ".join("--" + m for m in missing))


def _positive(cfg: ExperimentConfig, *names: str):
    for name in names:
        v = getattr(cfg, name)
        if v is not None and v <= 0:
            raise ConfigurationError(f"--{name} must be positive, got {v}")


def _clean(x):
    """JSON-friendly copy with plain floats and string keys."""
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, tuple) else " ".join(map(str, k)): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


# ------------------------------------------------------------------ commands

def _limit_spectrum(cfg: ExperimentConfig):
    space = cfg.space_spec()
    if not space.is_group:
        raise ConfigurationError("limit-spectrum works on groups; use rankone-table for spheres")
    rs = space.root_system()
    L = cfg.level(space)
    cutoff = cfg.cutoff if cfg.cutoff is not None else gaussian.DEFAULT_RMAX
    lines = gaussian.limiting_spectrum(rs, L, cutoff)
    top = cfg.top if cfg.top is not None else len(lines)
    rows = gaussian.spectrum_rows(lines[:top])
    result = {"group": space.name, "root_system": rs.name, "lines_in_window": len(lines)}
    try:
        gap = gaussian.spectral_radius_gap(rs, L, cutoff)
        result.update({"radius_coeff": gap["radius_coeff"], "gap_coeff": gap["gap_coeff"],
                       "gap_maximizer": list(gap["maximizer"])})
    except AdvisoryError as exc:
        result["advisory"] = str(exc)
    return rows, result


def _limit_lines(space: SpaceSpec, L: float, cutoff: float):
    """Limit spectrum (values with multiplicity) for a group or a sphere."""
    if space.is_group:
        return gaussian.limiting_spectrum(space.root_system(), L, cutoff)
    ro = rankone.rank_one_space("sphere", space.n)
    k_max = max(1, int(math.ceil(cutoff / L)))
    return [(r["c"], r["multiplicity"]) for r in rankone.rankone_table(ro, L, k_max)]


def _simulate_gaussian(cfg: ExperimentConfig):
    space = cfg.space_spec()
    _require(cfg, "N")
    _positive(cfg, "N", "trials")
    if cfg.N > 4000:
        raise ConfigurationError("--N above 4000 is outside the dense eigensolver's range")
    L = cfg.level(space)
    trials = cfg.trials if cfg.trials is not None else 1
    cutoff = cfg.cutoff if cfg.cutoff is not None else gaussian.DEFAULT_RMAX
    lines = _limit_lines(space, L, cutoff)
    limit = spectra.expand_lines(lines)
    c0 = float(np.max(limit))
    top = cfg.top if cfg.top is not None else 3

    def one_trial(trial: int) -> dict:
        # each trial owns its random stream, so the thread count cannot change the rows
        graph = build_geometric_graph(space, cfg.N, L, make_rng(cfg.seed, trial))
        sm = spectra.spectral_measure(graph.adjacency.astype(float)).scaled(1.0 / cfg.N)
        row = {"trial": trial, "top_ratio": float(sm.eigenvalues[0]), "gk_delta": spectra.gk_delta(sm, lines)}
        for i in range(1, min(top, cfg.N)):
            row[f"eig{i}"] = float(sm.eigenvalues[i])
        return row

    with ThreadPoolExecutor(max_workers=min(worker_count(), trials)) as pool:
        rows = list(pool.map(one_trial, range(trials)))
    ratios = np.array([r["top_ratio"] for r in rows])
    deltas = np.array([r["gk_delta"] for r in rows])
    result = {"space": space.name, "L": L, "c0": c0, "mean_top_ratio": float(ratios.mean()),
              "relative_error": float(abs(ratios.mean() - c0) / c0), "mean_gk_delta": float(deltas.mean())}
    return rows, result


def _rankone_table(cfg: ExperimentConfig):
    space = _rank_one(cfg.space, cfg.n)
    _require(cfg, "L")
    if not 0 < cfg.L <= space.max_level:
        raise ConfigurationError(f"--L must lie in (0, {space.max_level:.6g}] for {space.name}")
    k_max = cfg.top if cfg.top is not None else 10
    rows = rankone.rankone_table(space, cfg.L, k_max)
    return rows, {"space": space.name, "dimension": space.dimension, "L": cfg.L}


def _simulate_poisson(cfg: ExperimentConfig):
    space = cfg.space_spec()
    L = cfg.level(space)
    _positive(cfg, "N", "ell", "trials")
    trials = cfg.trials if cfg.trials is not None else 200
    s_max = cfg.s if cfg.s is not None else 5
    radius = cfg.radius if cfg.radius is not None else 1
    if not 1 <= s_max <= 12:
        raise ConfigurationError("--s (largest moment) must lie in 1..12")
    bs = poisson.bs_compare(space, cfg.N, cfg.ell, radius, trials, make_rng(cfg.seed, 0))
    emp = moments.empirical_limit_moments(space, cfg.N, cfg.ell, trials, s_max, make_rng(cfg.seed, 1))
    rows = [{"s": s, "empirical": emp["mean"][s - 1], "stderr": emp["stderr"][s - 1]}
            for s in range(1, s_max + 1)]
    result = {"space": space.name, "L_N": L, "intensity": bs["intensity"], "tv_distance": bs["tv_distance"],
              "radius": radius, "graphs": trials}
    return rows, result


def _moments(cfg: ExperimentConfig):
    if cfg.space is not None and parse_space(cfg.space) != SpaceSpec("su", 2):
        raise ConfigurationError("moments are assembled for SU(2) only; use --space su2 or omit it")
    _require(cfg, "ell")
    _positive(cfg, "ell", "trials")
    s_max = cfg.s if cfg.s is not None else 7
    trials = cfg.trials if cfg.trials is not None else 20000
    table = moments.limiting_moments(cfg.ell, s_max, simulate_trials=trials, rng=make_rng(cfg.seed, 0))
    rows = []
    for s in sorted(table.M):
        sims = [t for t in table.terms[s] if t["provenance"] == "simulated"]
        se = math.sqrt(sum(t["stderr"] ** 2 for t in table.terms[s]))
        rows.append({"s": s, "M": table.M[s], "stderr": se, "terms": len(table.terms[s]),
                     "simulated_terms": len(sims)})
    result = {"ell": table.ell, "ell_prime": table.ell_prime, "I": table.I, "terms": table.terms}
    return rows, result


def _circuit_table(cfg: ExperimentConfig):
    s = cfg.s if cfg.s is not None else 4
    table = circuits.expansion_table(s)
    rows = [{"reduced": row.descriptor, "multiplicity": row.multiplicity, "k": row.k} for row in table]
    return rows, {"s": s, "total_circuits": sum(r["multiplicity"] for r in rows), "terms": len(rows)}


def _lr(cfg: ExperimentConfig):
    family = cfg.family if cfg.family is not None else "A2"
    lam = _parse_weight(cfg.lam, "--lam")
    mu = _parse_weight(cfg.mu, "--mu")
    if cfg.t is not None:
        ts = [int(v) for v in re.split(r"[,\s]+", cfg.t.strip()) if v]
        if not ts or min(ts) < 1:
            raise ConfigurationError("--t must be positive integers separated by commas")
        rows = crystal.lr_scaling_check(family, lam, mu, ts)
        return rows, {"family": family, "x": list(lam), "y": list(mu), "mode": "scaling"}
    poly = crystal.lr_polytope_table(family, lam, mu)
    oracle = crystal.lr_oracle_table(family, lam, mu)
    rows = [{"nu": " ".join(map(str, nu)), "c": poly[nu], "oracle": oracle.get(nu, 0)} for nu in sorted(poly)]
    return rows, {"family": family, "lambda": list(lam), "mu": list(mu), "terms": len(rows),
                  "total": int(sum(poly.values())), "agrees_with_oracle": poly == oracle}


def _volumes(cfg: ExperimentConfig):
    if (cfg.family is None) != (cfg.n is None):
        raise ConfigurationError("volumes needs --family and --n together, or neither for the default list")
    groups = [(cfg.family.upper(), cfg.n)] if cfg.family is not None else list(DEFAULT_VOLUME_GROUPS)
    rows = []
    for fam, n in groups:
        rs = rootdata.build_root_system(fam, n)
        v = rootdata.volumes(rs)
        table = rootdata.torus_covolume_table(fam, n)
        rows.append({
            "group": f"{fam}{n}",
            "vol_t_mod_tZ": v["vol_t_mod_tZ"],
            "vol_t_table": table,
            "vol_G_macdonald": v["vol_G_macdonald"],
            "vol_G_kp": v["vol_G_kp"],
            "rel_diff": abs(v["vol_G_kp"] - v["vol_G_macdonald"]) / v["vol_G_macdonald"],
        })
    worst = max(r["rel_diff"] for r in rows)
    return rows, {"groups": len(rows), "max_rel_diff": worst}


_HANDLERS = {
    "limit-spectrum": _limit_spectrum,
    "simulate-gaussian": _simulate_gaussian,
    "rankone-table": _rankone_table,
    "simulate-poisson": _simulate_poisson,
    "circuit-table": _circuit_table,
    "moments": _moments,
    "lr": _lr,
    "volumes": _volumes,
}


# ------------------------------------------------------------------ output

def rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    keys = list(rows[0])
    for r in rows[1:]:
        keys += [k for k in r if k not in keys]
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def run(cfg: ExperimentConfig) -> dict:
    """Execute a command; returns the summary and writes files when ``cfg.out`` is set."""
    rows, result = _HANDLERS[cfg.command](cfg)
    rows, result = _clean(rows), _clean(result)
    body = {"command": cfg.command, "config": cfg.embedded(), "seed": cfg.seed, "result": result, "rows": rows}
    summary = {**body, "content_hash": content_hash(body)}
    if cfg.out is not None:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = cfg.command.replace("-", "_")
        data = out / f"{stem}.{cfg.format}"
        if cfg.format == "csv":
            header = f"# {cfg.command} seed={cfg.seed} content_hash={summary['content_hash']}\n"
            data.write_text(header + rows_csv(rows))
        else:
            data.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        (out / f"{stem}.summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        if cfg.plot:
            from .report import render

            render(cfg.command, rows, out / f"{stem}.png")
    elif cfg.plot:
        raise ConfigurationError("--plot writes a PNG next to the data; give --out DIR as well")
    return summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liegraph", description="Spectra of random geometric graphs on compact Lie groups")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "limit-spectrum": "limiting eigenvalues c_lambda and multiplicities in the Gaussian regime",
        "simulate-gaussian": "sample graphs at fixed L and compare their spectra with the limit",
        "rankone-table": "limiting eigenvalues on a rank-one symmetric space",
        "simulate-poisson": "local-limit distance and empirical moments at L_N = (ell/N)^(1/dim)",
        "circuit-table": "reduced-circuit expansion of the s-th moment",
        "moments": "limit moments M_s(ell) for SU(2) from the circuit expansion",
        "lr": "Littlewood-Richardson coefficients from string polytopes (A1, A2)",
        "volumes": "torus covolumes and group volumes by two independent formulas",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--space", help="su2, su3, so3, usp2, sphere2 (rankone-table: sphere2, rp2, cp2, hp2, op2)")
        sp.add_argument("--family", help="root system family (A, B, C, D; lr: A1 or A2)")
        sp.add_argument("--n", type=int, help="rank for --family, or dimension for rank-one spaces")
        sp.add_argument("--L", type=float, help="connection level (Gaussian regime)")
        sp.add_argument("--ell", type=float, help="mean-degree parameter (Poisson regime)")
        sp.add_argument("--N", type=int, help="number of vertices")
        sp.add_argument("--trials", type=int, help="number of simulated graphs or Monte Carlo samples")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--cutoff", type=float, help="window L*||lambda+rho|| <= cutoff for limit spectra")
        sp.add_argument("--top", type=int, help="number of lines / eigenvalues / table rows to report")
        sp.add_argument("--s", type=int, help="moment order or circuit length")
        sp.add_argument("--radius", type=int, help="neighbourhood radius n for pi_n")
        sp.add_argument("--lam", help="first weight, e.g. 2,1")
        sp.add_argument("--mu", help="second weight, e.g. 1,1")
        sp.add_argument("--t", help="scaling factors for lr, e.g. 10,20,40")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--plot", action="store_true", help="also render a PNG (needs matplotlib)")
    return p


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    given = {k for k, v in vars(ns).items() if v is not None and k != "command" and v is not False}
    extra = given - ALLOWED[ns.command] - _COMMON
    if extra:
        ok = ", ".join("--" + f for f in sorted(ALLOWED[ns.command]))
        raise ConfigurationError(
            f"{ns.command} does not use " + ", ".join("--" + f for f in sorted(extra)) + f"; it accepts {ok}")
    return ExperimentConfig(**vars(ns))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        summary = run(cfg)
    except (ConfigurationError, OutOfRangeError) as exc:
        print(f"liegraph {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, AdvisoryError) as exc:
        print(f"liegraph {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg.out is None:
        if cfg.format == "csv":
            sys.stdout.write(rows_csv(summary["rows"]))
        else:
            sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    else:
        print(f"wrote {cfg.out} (content_hash {summary['content_hash']})")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
