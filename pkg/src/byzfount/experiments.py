"""Monte Carlo harness: configs, trial records, and summary reports.

Four experiment kinds share one shape: a flat config (TOML or dict),
one deterministic generator per trial derived from the master seed, a
CSV with one row per trial, and a JSON summary with aggregates and
Wilson 95% intervals.  Re-running a config with the same seed produces
byte-identical files; timing is deliberately never persisted so that
the determinism guarantee covers whole files, not just columns.

Trial index -> generator mapping: trial t of grid cell c uses
``trial_rng(seed, c * trials + t)``, so cells can be recomputed or
parallelized independently without disturbing each other's draws.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .adversary import CBound, odd_packets_attack, vanishing_symbol_attack
from .coding import CodingDistribution, generate_packet
from .decoders import (
    EXHAUSTIVE_K_CEILING,
    DecodePlan,
    coefficient_matrix,
    decode_all_blocks,
    plan_uniform,
    randomized_g,
)
from .gf2 import BitMatrix, BitVector, random_matrix, rank, rank_failure_limit
from .lt import Decoded, RobustSoliton, bp_decode, lt_encode
from .seeds import trial_rng

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "wilson",
    "run_rank_experiment",
    "run_attack_campaign",
    "run_decoder_benchmark",
    "run_shared_value_scenario",
    "run_experiment",
    "flip_trial_scene",
]


class ConfigError(ValueError):
    """Bad or unknown experiment configuration."""


_COMMON_KEYS = {"experiment", "trials", "seed", "out_dir"}

_KIND_KEYS = {
    "rank": {"k", "extra_rows", "ensemble", "bernoulli_c"},
    "attack": {
        "attack",
        "k",
        "n_packets",
        "c",
        "c_rs",
        "delta",
        "symbol_bits",
        "target",
        "m",
        "f",
        "epsilon",
    },
    "decoder": {
        "decoder",
        "k",
        "m",
        "f",
        "epsilon",
        "b_param",
        "dist",
        "delta_window",
        "n_packets",
    },
    "shared-value": {"sources", "byzantine", "k", "m", "epsilon"},
}

# keys meaningful only for some attack sub-kinds
_ATTACK_KEYS = {
    "odd": {"attack", "k", "n_packets", "c", "c_rs", "delta", "symbol_bits"},
    "vanish": {
        "attack",
        "k",
        "n_packets",
        "c",
        "c_rs",
        "delta",
        "symbol_bits",
        "target",
    },
    "flip": {"attack", "k", "m", "f", "epsilon"},
}


def _want_int(d: dict, key: str, minimum: Optional[int] = None) -> int:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {v}")
    return v


def _want_float(d: dict, key: str) -> float:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    return float(v)


def _want_choice(d: dict, key: str, choices: tuple) -> str:
    v = d[key]
    if v not in choices:
        raise ConfigError(f"{key} must be one of {choices}, got {v!r}")
    return v


def _require(d: dict, keys: Sequence[str], kind: str) -> None:
    missing = [key for key in keys if key not in d]
    if missing:
        raise ConfigError(f"{kind} experiment requires {', '.join(missing)}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, fully-validated description of one experiment run."""

    kind: str
    trials: int
    seed: int
    out_dir: Optional[str] = None
    # rank
    k: Optional[int] = None
    extra_rows: Optional[tuple] = None
    ensemble: str = "uniform"
    bernoulli_c: float = 4.0
    # attack
    attack: Optional[str] = None
    n_packets: Optional[int] = None
    c: str = "1/3"
    c_rs: float = 0.1
    delta: float = 0.05
    symbol_bits: int = 8
    target: int = -1
    # decoder / flip / shared-value
    m: Optional[int] = None
    f: Optional[int] = None
    epsilon: Optional[int] = None
    decoder: Optional[str] = None
    b_param: float = 2.0
    dist: str = "uniform"
    delta_window: float = 1.0
    # shared-value
    sources: Optional[int] = None
    byzantine: Optional[int] = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if "experiment" not in d:
            raise ConfigError("config must name an experiment kind")
        kind = d["experiment"]
        if kind not in _KIND_KEYS:
            raise ConfigError(
                f"unknown experiment {kind!r}; expected one of {sorted(_KIND_KEYS)}"
            )
        allowed = _COMMON_KEYS | _KIND_KEYS[kind]
        unknown = sorted(set(d) - allowed)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        _require(d, ["trials", "seed"], kind)
        kw: dict = {
            "kind": kind,
            "trials": _want_int(d, "trials", 1),
            "seed": _want_int(d, "seed", 0),
            "out_dir": d.get("out_dir"),
        }
        if kind == "rank":
            cls._parse_rank(d, kw)
        elif kind == "attack":
            cls._parse_attack(d, kw)
        elif kind == "decoder":
            cls._parse_decoder(d, kw)
        else:
            cls._parse_shared(d, kw)
        return cls(**kw)

    @staticmethod
    def _parse_rank(d: dict, kw: dict) -> None:
        _require(d, ["k", "extra_rows"], "rank")
        kw["k"] = _want_int(d, "k", 2)
        extra = d["extra_rows"]
        if not isinstance(extra, (list, tuple)) or not extra:
            raise ConfigError("extra_rows must be a non-empty list")
        for e in extra:
            if isinstance(e, bool) or not isinstance(e, int) or e < 0:
                raise ConfigError(f"extra_rows entries must be ints >= 0, got {e!r}")
        kw["extra_rows"] = tuple(extra)
        if "ensemble" in d:
            kw["ensemble"] = _want_choice(d, "ensemble", ("uniform", "bernoulli"))
        if "bernoulli_c" in d:
            kw["bernoulli_c"] = _want_float(d, "bernoulli_c")
            if kw["bernoulli_c"] <= 0:
                raise ConfigError("bernoulli_c must be positive")

    @staticmethod
    def _parse_attack(d: dict, kw: dict) -> None:
        _require(d, ["attack", "k"], "attack")
        sub = _want_choice(d, "attack", ("odd", "vanish", "flip"))
        bad = sorted((set(d) - _COMMON_KEYS) - _ATTACK_KEYS[sub])
        if bad:
            raise ConfigError(f"key(s) not used by attack={sub}: {', '.join(bad)}")
        kw["attack"] = sub
        kw["k"] = _want_int(d, "k", 2)
        if sub in ("odd", "vanish"):
            _require(d, ["n_packets"], f"attack={sub}")
            kw["n_packets"] = _want_int(d, "n_packets", 1)
            if "c" in d:
                kw["c"] = str(d["c"])
            CBound(Fraction(kw.get("c", "1/3")), scope="final")  # validates range
            for key in ("c_rs", "delta"):
                if key in d:
                    kw[key] = _want_float(d, key)
            if "symbol_bits" in d:
                kw["symbol_bits"] = _want_int(d, "symbol_bits", 1)
            if sub == "vanish" and "target" in d:
                kw["target"] = _want_int(d, "target", -1)
                if kw["target"] >= kw["k"]:
                    raise ConfigError("target must lie below k")
        else:
            _require(d, ["m", "f", "epsilon"], "attack=flip")
            kw["m"] = _want_int(d, "m", 1)
            kw["f"] = _want_int(d, "f", 0)
            kw["epsilon"] = _want_int(d, "epsilon", 1)
            plan_uniform(kw["k"], kw["f"], kw["epsilon"])  # validates the triple

    @staticmethod
    def _parse_decoder(d: dict, kw: dict) -> None:
        _require(d, ["decoder", "k", "m", "f", "epsilon"], "decoder")
        dec = _want_choice(d, "decoder", ("bp", "majority", "exhaustive", "randomized"))
        kw["decoder"] = dec
        kw["k"] = _want_int(d, "k", 2)
        kw["m"] = _want_int(d, "m", 1)
        kw["f"] = _want_int(d, "f", 0)
        floor_eps = 1 if dec in ("exhaustive", "randomized") else 0
        kw["epsilon"] = _want_int(d, "epsilon", floor_eps)
        if "b_param" in d:
            kw["b_param"] = _want_float(d, "b_param")
            if kw["b_param"] <= 1.0:
                raise ConfigError("b_param must exceed 1")
        if "dist" in d:
            kw["dist"] = _want_choice(d, "dist", ("uniform", "log"))
        if "delta_window" in d:
            kw["delta_window"] = _want_float(d, "delta_window")
        if dec in ("majority", "bp"):
            _require(d, ["n_packets"], f"decoder={dec}")
            kw["n_packets"] = _want_int(d, "n_packets", 1)
        elif "n_packets" in d:
            kw["n_packets"] = _want_int(d, "n_packets", 1)

    @staticmethod
    def _parse_shared(d: dict, kw: dict) -> None:
        _require(d, ["sources", "byzantine", "k", "m", "epsilon"], "shared-value")
        kw["sources"] = _want_int(d, "sources", 1)
        kw["byzantine"] = _want_int(d, "byzantine", 0)
        if 2 * kw["byzantine"] >= kw["sources"]:
            raise ConfigError("byzantine sources must be fewer than half")
        kw["k"] = _want_int(d, "k", 2)
        if kw["k"] > EXHAUSTIVE_K_CEILING:
            raise ConfigError(f"shared-value uses the scan decoder; k <= {EXHAUSTIVE_K_CEILING}")
        kw["m"] = _want_int(d, "m", 1)
        kw["epsilon"] = _want_int(d, "epsilon", 1)

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fp:
            try:
                data = tomllib.load(fp)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"invalid TOML: {exc}") from exc
        if any(isinstance(v, dict) for v in data.values()):
            raise ConfigError("config must be flat key/value pairs, no tables")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        """Config echo for summaries: kind-relevant keys only, flat."""
        out = {"experiment": self.kind, "trials": self.trials, "seed": self.seed}
        for key in sorted(_KIND_KEYS[self.kind]):
            value = getattr(self, "kind" if key == "experiment" else key)
            if value is None:
                continue
            out[key] = list(value) if isinstance(value, tuple) else value
        if self.kind == "attack":
            keep = _ATTACK_KEYS[self.attack]
            out = {
                key: v
                for key, v in out.items()
                if key in ("experiment", "trials", "seed") or key in keep
            }
        return out


# ------------------------------------------------------------------ reporting


def wilson(successes: int, n: int, z: float = 1.96) -> tuple[float, float, float]:
    """Observed proportion with its Wilson score interval (95% default)."""
    if n <= 0:
        raise ValueError("need at least one observation")
    if not 0 <= successes <= n:
        raise ValueError("successes out of range")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n)) / denom
    return phat, max(0.0, center - half), min(1.0, center + half)


def _rate_entry(successes: int, n: int) -> dict:
    phat, lo, hi = wilson(successes, n)
    return {"rate": phat, "wilson_low": lo, "wilson_high": hi}


# ------------------------------------------------------------------ rank


def run_rank_experiment(cfg: ExperimentConfig):
    """Empirical full-rank failure rate of random GF(2) matrices.

    One grid cell per extra-rows value: k + extra random rows over k
    columns, uniform or Bernoulli((log2 k + c)/k) entries.  Summary
    compares each cell against the 2^-extra bound and the exact
    infinite-k limit.
    """
    if cfg.kind != "rank":
        raise ValueError("config is not a rank experiment")
    k = cfg.k
    p = None
    if cfg.ensemble == "bernoulli":
        p = (math.log2(k) + cfg.bernoulli_c) / k
    fields = ["cell", "k", "rows", "ensemble", "trial", "full_rank"]
    rows_out: list[dict] = []
    cells = []
    for ci, extra in enumerate(cfg.extra_rows):
        nrows = k + extra
        failures = 0
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, ci * cfg.trials + t)
            mat = random_matrix(nrows, k, rng, p=p)
            full = rank(mat) == k
            failures += not full
            rows_out.append(
                {
                    "cell": ci,
                    "k": k,
                    "rows": nrows,
                    "ensemble": cfg.ensemble,
                    "trial": t,
                    "full_rank": int(full),
                }
            )
        phat, lo, hi = wilson(failures, cfg.trials)
        cells.append(
            {
                "extra": extra,
                "rows": nrows,
                "trials": cfg.trials,
                "failures": failures,
                "failure_rate": phat,
                "wilson_low": lo,
                "wilson_high": hi,
                "bound": 2.0**-extra,
                "limit": rank_failure_limit(extra),
            }
        )
    summary = {
        "config": cfg.to_dict(),
        "density": 0.5 if p is None else p,
        "cells": cells,
    }
    return fields, rows_out, summary


# ------------------------------------------------------------------ attack


def _random_symbols(k: int, bits: int, rng: np.random.Generator) -> list[BitVector]:
    return [BitVector.random(bits, rng) for _ in range(k)]


def _decoded_map(result) -> dict:
    if isinstance(result, Decoded):
        return dict(enumerate(result.symbols))
    return dict(result.decoded)


def _run_odd_campaign(cfg: ExperimentConfig):
    dist = RobustSoliton(cfg.k, c_rs=cfg.c_rs, delta=cfg.delta)
    bound = CBound(Fraction(cfg.c), scope="final")
    budget = bound.total_budget(cfg.n_packets)
    fields = [
        "trial",
        "odd_count",
        "budget",
        "feasible",
        "decoded_fraction",
        "all_complemented",
    ]
    rows_out = []
    feasible_n = 0
    complemented_n = 0
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        symbols = _random_symbols(cfg.k, cfg.symbol_bits, rng)
        stream = [lt_encode(symbols, dist, rng) for _ in range(cfg.n_packets)]
        odd_count = sum(p.degree % 2 for p in stream)
        feasible = odd_count <= budget
        row = {
            "trial": t,
            "odd_count": odd_count,
            "budget": budget,
            "feasible": int(feasible),
            "decoded_fraction": "",
            "all_complemented": "",
        }
        if feasible:
            feasible_n += 1
            dmap = _decoded_map(bp_decode(odd_packets_attack(stream), cfg.k))
            row["decoded_fraction"] = len(dmap) / cfg.k
            flipped = all(v == ~symbols[s] for s, v in dmap.items())
            row["all_complemented"] = int(flipped)
            complemented_n += flipped
        rows_out.append(row)
    summary = {
        "config": cfg.to_dict(),
        "feasibility_rate": feasible_n / cfg.trials,
        "complemented_rate": (complemented_n / feasible_n) if feasible_n else None,
        "budget": budget,
    }
    return fields, rows_out, summary


def _run_vanish_campaign(cfg: ExperimentConfig):
    dist = RobustSoliton(cfg.k, c_rs=cfg.c_rs, delta=cfg.delta)
    bound = CBound(Fraction(cfg.c), scope="final")
    budget = bound.total_budget(cfg.n_packets)
    fields = [
        "trial",
        "target",
        "edits",
        "contain_fraction",
        "feasible",
        "target_recovered",
        "others_fraction",
    ]
    rows_out = []
    recovered_n = 0
    feasible_n = 0
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        symbols = _random_symbols(cfg.k, cfg.symbol_bits, rng)
        stream = [lt_encode(symbols, dist, rng) for _ in range(cfg.n_packets)]
        target = cfg.target if cfg.target >= 0 else int(rng.integers(cfg.k))
        modified, edits = vanishing_symbol_attack(stream, target)
        dmap = _decoded_map(bp_decode(modified, cfg.k))
        hit = target in dmap
        recovered_n += hit
        feasible_n += edits <= budget
        others = sum(1 for s in dmap if s != target)
        rows_out.append(
            {
                "trial": t,
                "target": target,
                "edits": edits,
                "contain_fraction": edits / cfg.n_packets,
                "feasible": int(edits <= budget),
                "target_recovered": int(hit),
                "others_fraction": others / (cfg.k - 1) if cfg.k > 1 else "",
            }
        )
    mean_contain = sum(r["contain_fraction"] for r in rows_out) / cfg.trials
    summary = {
        "config": cfg.to_dict(),
        "target_recovery_rate": recovered_n / cfg.trials,
        "feasibility_rate": feasible_n / cfg.trials,
        "mean_contain_fraction": mean_contain,
        # analytic containment estimate for the robust spike at k/R
        "target_fraction_estimate": math.log(cfg.k / cfg.delta) / cfg.k,
    }
    return fields, rows_out, summary


def flip_trial_scene(cfg: ExperimentConfig, t: int):
    """Rebuild trial t of a flip campaign: (blocks, packets, victims).

    Draw order is frozen so failed trials can be re-derived and
    examined offline from the config and trial index alone.
    """
    rng = trial_rng(cfg.seed, t)
    plan = plan_uniform(cfg.k, cfg.f, cfg.epsilon)
    dist = CodingDistribution.uniform(cfg.k)
    blocks = [BitVector.random(cfg.k, rng) for _ in range(cfg.m)]
    mat = BitMatrix.from_rows(blocks)
    pkts = [generate_packet(mat, dist, "dense", rng) for _ in range(plan.required_packets)]
    if cfg.f:
        victims = sorted(
            int(i) for i in rng.choice(plan.required_packets, size=cfg.f, replace=False)
        )
    else:
        victims = []
    attacked = list(pkts)
    for i in victims:
        attacked[i] = dataclasses.replace(pkts[i], payload=~pkts[i].payload)
    return blocks, attacked, victims


def _run_flip_campaign(cfg: ExperimentConfig):
    plan = plan_uniform(cfg.k, cfg.f, cfg.epsilon)
    fields = [
        "trial",
        "packets",
        "threshold",
        "corrupted",
        "recovered",
        "wrong_block",
        "reason",
        "satisfied",
        "clean_full_rank",
    ]
    rows_out = []
    wins = 0
    wrong = 0
    for t in range(cfg.trials):
        blocks, attacked, victims = flip_trial_scene(cfg, t)
        outcome = decode_all_blocks(attacked, plan, "exhaustive")
        ok = outcome.ok and outcome.blocks == blocks
        bad = outcome.ok and outcome.blocks != blocks
        wins += ok
        wrong += bad
        clean = [p for i, p in enumerate(attacked) if i not in victims]
        clean_full = rank(coefficient_matrix(clean)) == cfg.k
        rows_out.append(
            {
                "trial": t,
                "packets": plan.required_packets,
                "threshold": plan.threshold,
                "corrupted": len(victims),
                "recovered": int(ok),
                "wrong_block": int(bad),
                "reason": outcome.reason or "",
                "satisfied": outcome.stats.satisfied
                if outcome.stats.satisfied is not None
                else "",
                "clean_full_rank": int(clean_full),
            }
        )
    summary = {
        "config": cfg.to_dict(),
        "recovery_rate": wins / cfg.trials,
        "wrong_rate": wrong / cfg.trials,
        "failure_bound": plan.failure_bound,
        "packets_per_trial": plan.required_packets,
        "threshold": plan.threshold,
    }
    summary.update({"recovery_" + key: v for key, v in _rate_entry(wins, cfg.trials).items() if key != "rate"})
    return fields, rows_out, summary


def run_attack_campaign(cfg: ExperimentConfig):
    """Per-trial feasibility and impact of one attack strategy."""
    if cfg.kind != "attack":
        raise ValueError("config is not an attack campaign")
    if cfg.attack == "odd":
        return _run_odd_campaign(cfg)
    if cfg.attack == "vanish":
        return _run_vanish_campaign(cfg)
    return _run_flip_campaign(cfg)


# ------------------------------------------------------------------ decoder


def run_decoder_benchmark(cfg: ExperimentConfig):
    """Success rate and iteration counts of one decoder under payload
    flips on f uniformly chosen packets per trial.
    """
    if cfg.kind != "decoder":
        raise ValueError("config is not a decoder benchmark")
    k, m, f, eps = cfg.k, cfg.m, cfg.f, cfg.epsilon
    plan = plan_uniform(k, f, max(eps, 1))
    if cfg.decoder == "exhaustive":
        n = plan.required_packets
    elif cfg.decoder == "randomized":
        n = randomized_g(k, f, eps, cfg.b_param) + k + f + eps
    else:
        n = cfg.n_packets
    if cfg.dist == "log":
        dist = CodingDistribution.log_sparse(k, delta=cfg.delta_window)
    else:
        dist = CodingDistribution.uniform(k)
    fields = [
        "trial",
        "decoder",
        "packets",
        "corrupted",
        "success",
        "iterations",
        "satisfied",
        "reason",
    ]
    rows_out = []
    wins = 0
    iters = []
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        blocks = [BitVector.random(k, rng) for _ in range(m)]
        mat = BitMatrix.from_rows(blocks)
        pkts = [generate_packet(mat, dist, "dense", rng) for _ in range(n)]
        if f:
            for i in rng.choice(n, size=f, replace=False):
                i = int(i)
                pkts[i] = dataclasses.replace(pkts[i], payload=~pkts[i].payload)
        outcome = decode_all_blocks(pkts, plan, cfg.decoder, rng=rng, b_param=cfg.b_param)
        ok = outcome.ok and outcome.blocks == blocks
        wins += ok
        iters.append(outcome.stats.iterations)
        rows_out.append(
            {
                "trial": t,
                "decoder": cfg.decoder,
                "packets": n,
                "corrupted": f,
                "success": int(ok),
                "iterations": outcome.stats.iterations,
                "satisfied": outcome.stats.satisfied
                if outcome.stats.satisfied is not None
                else "",
                "reason": outcome.reason or "",
            }
        )
    summary = {
        "config": cfg.to_dict(),
        "success_rate": wins / cfg.trials,
        "mean_iterations": sum(iters) / len(iters),
        "p90_iterations": float(np.percentile(iters, 90)),
        "packets_per_trial": n,
    }
    summary.update(
        {"success_" + key: v for key, v in _rate_entry(wins, cfg.trials).items() if key != "rate"}
    )
    return fields, rows_out, summary


# ------------------------------------------------------------------ shared value


def _byzantine_in_prefix(n: int, sources: int, byz: int) -> int:
    # byzantine sources occupy the first byz slots of each round
    full, rem = divmod(n, sources)
    return full * byz + min(rem, byz)


def _shared_value_size(k: int, epsilon: int, sources: int, byz: int) -> int:
    n = k + epsilon
    while n < k + 2 * _byzantine_in_prefix(n, sources, byz) + epsilon:
        n += 1
    return n


def run_shared_value_scenario(cfg: ExperimentConfig):
    """Several sources encode one message; some flood complemented
    payloads.  The receiver interleaves the streams round-robin and
    scan-decodes with the threshold implied by the corrupted count.
    """
    if cfg.kind != "shared-value":
        raise ValueError("config is not a shared-value scenario")
    k, m, eps = cfg.k, cfg.m, cfg.epsilon
    n = _shared_value_size(k, eps, cfg.sources, cfg.byzantine)
    n_byz = _byzantine_in_prefix(n, cfg.sources, cfg.byzantine)
    threshold = k + n_byz + eps
    plan = DecodePlan(
        model="uniform",
        k=k,
        epsilon=eps,
        required_packets=n,
        threshold=threshold,
        f=n_byz,
    )
    dist = CodingDistribution.uniform(k)
    rounds = -(-n // cfg.sources)
    fields = [
        "trial",
        "sources",
        "byzantine",
        "packets",
        "threshold",
        "recovered",
        "wrong_block",
        "reason",
    ]
    rows_out = []
    wins = 0
    wrong = 0
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        blocks = [BitVector.random(k, rng) for _ in range(m)]
        mat = BitMatrix.from_rows(blocks)
        per_source = rng.spawn(cfg.sources)
        streams = []
        for s in range(cfg.sources):
            pkts = [generate_packet(mat, dist, "dense", per_source[s]) for _ in range(rounds)]
            if s < cfg.byzantine:
                pkts = [dataclasses.replace(p, payload=~p.payload) for p in pkts]
            streams.append(pkts)
        collected = []
        for r in range(rounds):
            for s in range(cfg.sources):
                if len(collected) < n:
                    collected.append(streams[s][r])
        outcome = decode_all_blocks(collected, plan, "exhaustive")
        ok = outcome.ok and outcome.blocks == blocks
        bad = outcome.ok and outcome.blocks != blocks
        wins += ok
        wrong += bad
        rows_out.append(
            {
                "trial": t,
                "sources": cfg.sources,
                "byzantine": cfg.byzantine,
                "packets": n,
                "threshold": threshold,
                "recovered": int(ok),
                "wrong_block": int(bad),
                "reason": outcome.reason or "",
            }
        )
    summary = {
        "config": cfg.to_dict(),
        "recovery_rate": wins / cfg.trials,
        "wrong_rate": wrong / cfg.trials,
        "byzantine_fraction": cfg.byzantine / cfg.sources,
        "packets_per_trial": n,
        "threshold": threshold,
    }
    return fields, rows_out, summary


# ------------------------------------------------------------------ driver


_RUNNERS = {
    "rank": run_rank_experiment,
    "attack": run_attack_campaign,
    "decoder": run_decoder_benchmark,
    "shared-value": run_shared_value_scenario,
}


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run one experiment and, when out_dir is given, persist
    ``<kind>_trials.csv`` and ``<kind>_summary.json`` there.
    """
    fields, rows, summary = _RUNNERS[cfg.kind](cfg)
    result = {"fields": fields, "rows": rows, "summary": summary}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        token = cfg.kind.replace("-", "_")
        csv_path = out / f"{token}_trials.csv"
        with open(csv_path, "w", newline="") as fp:
            writer = csv.DictWriter(fp, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        json_path = out / f"{token}_summary.json"
        json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        result["csv"] = csv_path
        result["json"] = json_path
    return result
