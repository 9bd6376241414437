"""Command-line toolkit: encode, decode, attack, experiment.

Exit codes: 0 success, 1 decode failure, 2 usage or config error,
3 malformed packets file.

The decode subcommand reconstructs the padded message (m*k bits,
rounded up to whole bytes), so the output may carry up to m-1 zero
bits plus byte fill beyond the original length; callers that know the
original size truncate.  Exhaustive decoding consumes exactly the
plan's packet count from the front of the file, since its acceptance
threshold is calibrated to that count; the other algorithms use every
packet present.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .adversary import (
    AdversarySpec,
    CBound,
    OddPackets,
    PayloadFlip,
    VanishingSymbol,
    transmit,
)
from .coding import (
    CodingDistribution,
    MalformedPacketError,
    MessageLayout,
    generate_packet,
    join_blocks,
    parse_packets,
    split_message,
    write_packets,
)
from .decoders import decode_all_blocks, plan_selective, plan_uniform
from .experiments import ConfigError, ExperimentConfig, run_experiment
from .gf2 import BitMatrix, BitVector
from .seeds import make_rng

_KINDS = ("rank", "attack", "decoder", "shared-value")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="byzfount",
        description="corruption-resilient fountain codes over GF(2)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="split a file into blocks and emit packets")
    enc.add_argument("--input", required=True, help="message file")
    enc.add_argument("--blocks", type=int, required=True, metavar="M")
    enc.add_argument("--dist", choices=("uniform", "log"), default="uniform")
    enc.add_argument("--delta", type=float, default=1.0, help="log density slack")
    enc.add_argument("--header", choices=("dense", "indices", "seed"), default="dense")
    enc.add_argument("--count", type=int, required=True, metavar="N")
    enc.add_argument("--seed", type=int, default=0)
    enc.add_argument("--out", required=True, help="packets file")
    enc.set_defaults(func=_cmd_encode)

    dec = sub.add_parser("decode", help="recover the message from a packets file")
    dec.add_argument("--packets", required=True)
    dec.add_argument(
        "--algo",
        choices=("bp", "majority", "exhaustive", "randomized"),
        required=True,
    )
    dec.add_argument("--k", type=int, required=True, help="expected block length")
    dec.add_argument("--f", type=int, default=0, help="corrupted-packet allowance")
    dec.add_argument("--epsilon", type=int, default=1)
    dec.add_argument("--b", type=float, default=None,
                     help="selective-adversary rate; switches to the a/b plan")
    dec.add_argument("--seed", type=int, default=0)
    dec.add_argument("--out", required=True, help="recovered message file")
    dec.set_defaults(func=_cmd_decode)

    att = sub.add_parser("attack", help="pass packets through a corrupting channel")
    att.add_argument("--packets", required=True)
    att.add_argument("--strategy", choices=("flip", "vanish", "odd"), required=True)
    att.add_argument("--target", type=int, default=None,
                     help="symbol index to erase (vanish only)")
    att.add_argument("--c", required=True, metavar="RATIONAL",
                     help="corruption bound in (0, 1/3], e.g. 1/4")
    att.add_argument("--adversary", required=True,
                     metavar="{uniform|selective}:{online|offline}")
    att.add_argument("--seed", type=int, default=0)
    att.add_argument("--out", required=True)
    att.set_defaults(func=_cmd_attack)

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    exp.add_argument("kind", choices=_KINDS)
    exp.add_argument("--config", required=True, help="flat TOML config")
    exp.add_argument("--trials", type=int, default=None)
    exp.add_argument("--seed", type=int, default=None)
    exp.add_argument("--out", required=True, help="result directory")
    exp.set_defaults(func=_cmd_experiment)

    return parser


# ---------------------------------------------------------------- subcommands


def _cmd_encode(args) -> int:
    data = Path(args.input).read_bytes()
    if not data:
        raise ValueError("input file is empty")
    message = BitVector.from_bytes_lsb(data, 8 * len(data))
    layout, blocks = split_message(message, args.blocks)
    if args.dist == "log":
        dist = CodingDistribution.log_sparse(layout.k, delta=args.delta)
    else:
        dist = CodingDistribution.uniform(layout.k)
    rng = make_rng(args.seed)
    mat = BitMatrix.from_rows(blocks)
    pkts = [generate_packet(mat, dist, args.header, rng) for _ in range(args.count)]
    with open(args.out, "wb") as fp:
        write_packets(fp, pkts)
    print(f"wrote {len(pkts)} packets (k={layout.k}, m={layout.m}) -> {args.out}")
    return 0


def _cmd_decode(args) -> int:
    pkts = parse_packets(Path(args.packets).read_bytes())
    if not pkts:
        raise ValueError("packets file is empty")
    k = pkts[0].k
    if args.k != k:
        raise ValueError(f"packets carry k={k}, --k says {args.k}")
    if args.b is not None:
        if args.algo != "exhaustive":
            raise ValueError("--b selects the selective plan, which is decoded "
                             "exhaustively; use --algo exhaustive")
        plan = plan_selective(k, args.b)
    else:
        plan = plan_uniform(k, args.f, max(args.epsilon, 1))
    if args.algo == "exhaustive":
        if len(pkts) < plan.required_packets:
            raise ValueError(
                f"plan needs {plan.required_packets} packets, file has {len(pkts)}"
            )
        pkts = pkts[: plan.required_packets]
    outcome = decode_all_blocks(pkts, plan, args.algo, rng=make_rng(args.seed))
    if not outcome.ok:
        print(f"decode failed: {outcome.reason}", file=sys.stderr)
        return 1
    m = len(outcome.blocks)
    layout = MessageLayout(m=m, k=k, pad_bits=0)
    Path(args.out).write_bytes(join_blocks(layout, outcome.blocks).to_bytes_lsb())
    print(f"recovered {m} blocks (k={k}) -> {args.out}")
    return 0


def _parse_adversary(text: str) -> tuple[str, str]:
    selection, sep, knowledge = text.partition(":")
    if not sep:
        raise ValueError(
            "--adversary must look like selective:offline or uniform:online"
        )
    return knowledge, selection


def _cmd_attack(args) -> int:
    pkts = parse_packets(Path(args.packets).read_bytes())
    if args.strategy == "vanish":
        if args.target is None:
            raise ValueError("--target is required for the vanish strategy")
        strategy = VanishingSymbol(args.target)
    else:
        if args.target is not None:
            raise ValueError("--target only applies to the vanish strategy")
        strategy = PayloadFlip() if args.strategy == "flip" else OddPackets()
    knowledge, selection = _parse_adversary(args.adversary)
    spec = AdversarySpec(knowledge, selection, CBound(Fraction(args.c)), strategy)
    delivered = transmit(pkts, spec, make_rng(args.seed))
    corrupted = sum(flag for _, flag in delivered)
    with open(args.out, "wb") as fp:
        write_packets(fp, [p for p, _ in delivered])
    print(f"corrupted {corrupted} of {len(pkts)} packets -> {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    with open(args.config, "rb") as fp:
        data = tomllib.load(fp)
    if any(isinstance(v, dict) for v in data.values()):
        raise ConfigError("config must be flat key/value pairs, no tables")
    if "experiment" in data and data["experiment"] != args.kind:
        raise ConfigError(
            f"config names experiment {data['experiment']!r}, command says {args.kind!r}"
        )
    data["experiment"] = args.kind
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = ExperimentConfig.from_dict(data)
    result = run_experiment(cfg, args.out)
    print(f"wrote {result['csv']}")
    print(f"wrote {result['json']}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MalformedPacketError as exc:
        print(f"malformed packets file: {exc} (offset {exc.offset})", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
