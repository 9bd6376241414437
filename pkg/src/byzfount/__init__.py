"""byzfount: rateless GF(2) codes that survive corrupted packets.

Encoders draw random coding vectors per packet, so any sufficiently large
subset of packets reconstructs the message; the decoders tolerate a
bounded fraction of adversarially corrupted packets.  Submodules: gf2
(bit-packed linear algebra), coding (packets and wire format), lt (a
classic fountain-code reference with a peeling decoder), adversary
(channel corruption models), decoders (corruption-tolerant decoding),
experiments (Monte Carlo harness), cli (command line front end).
"""

from ._kernels import BACKEND as kernel_backend
from .adversary import (
    AdversarySpec,
    CBound,
    Feasibility,
    OddPackets,
    PayloadFlip,
    VanishingSymbol,
    attack_feasible,
    odd_packets_attack,
    transmit,
    vanishing_symbol_attack,
)
from .coding import (
    CodingDistribution,
    DenseHeader,
    IndexListHeader,
    MalformedPacketError,
    MessageLayout,
    Packet,
    SeedHeader,
    deserialize_packet,
    expand_header,
    generate_packet,
    join_blocks,
    parse_packets,
    read_packets,
    serialize_packet,
    split_message,
    write_packets,
)
from .decoders import (
    DecodeOutcome,
    DecodePlan,
    DecodeStats,
    adaptive_decode,
    decode_all_blocks,
    exhaustive_decode,
    majority_applicable,
    majority_decode,
    plan_selective,
    plan_uniform,
    randomized_decode,
    randomized_g,
    selective_exponent,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    run_attack_campaign,
    run_decoder_benchmark,
    run_experiment,
    run_rank_experiment,
    run_shared_value_scenario,
    wilson,
)
from .gf2 import (
    BitMatrix,
    BitVector,
    LinearSystem,
    NoSolution,
    Underdetermined,
    count_satisfied,
    matvec,
    rank,
    rank_failure_limit,
    random_matrix,
    solve_unique,
)
from .lt import (
    Decoded,
    FixedDegree,
    IdealSoliton,
    Inconsistency,
    LtPacket,
    RobustSoliton,
    Stalled,
    bp_decode,
    lt_encode,
    odd_degree_fraction,
    sample_degree,
    sample_degrees,
)
from .seeds import make_rng, trial_rng

__version__ = "0.1.0"
