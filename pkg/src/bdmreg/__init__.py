"""Algorithmic-complexity estimation for graphs and its use as a
link-prediction regularizer.

The pieces, bottom up: exhaustive small-Turing-machine enumeration producing
complexity tables (`ctm`), block-decomposition scoring of binary matrices
with O(1) single-entry flip deltas (`bdm`), a Monte-Carlo perturbation
gradient of expected complexity over a Bernoulli edge model (`regularizer`),
dense graph autoencoders hosting that gradient as a loss term (`linkpred`),
plus data splitting (`data`), ranking metrics (`metrics`), and the
experiment harness (`cli`).
"""

from .bdm import (
    BdmState,
    BlockCounts,
    apply_flip,
    bdm,
    bdm_string,
    block_key_string,
    cw_value,
    flip_delta,
    make_state,
    partition,
)
from .ctm import (
    ConstantCtmTable,
    CtmTable,
    RunOutcome,
    RunStatus,
    TuringMachine,
    average_ctm,
    build_ctm_table,
    enumerate_distribution,
    iter_machines,
    load_ctm_table,
    lookup,
    machine_count,
    run_tm,
    save_ctm_table,
)
from .data import (
    EdgeList,
    GraphData,
    SplitData,
    parse_edge_list,
    split,
    to_graph_data,
)
from .errors import (
    BdmRegError,
    DegenerateLabels,
    DimensionMismatch,
    EmptyGraph,
    EmptyTable,
    MissingBlock,
    NotEnoughNonEdges,
    ParseError,
    TooLarge,
    TrainingDiverged,
    ZeroHaltingMachines,
)
from .linkpred import (
    GraphAutoencoder,
    TrainConfig,
    TrialResult,
    adam_init,
    adam_step,
    backward,
    decode,
    encode,
    forward,
    gcn_normalize,
    glorot_init,
    init_params,
    load_weights,
    loss,
    save_weights,
    score_edges,
    train,
)
from .metrics import auc, average_precision
from .regularizer import (
    GradientSample,
    RegConfig,
    exact_expected_bdm,
    exact_gradient,
    grad_sample,
    reg_backward,
    reg_term,
    sample_adjacency,
)

__version__ = "0.1.0"

__all__ = [
    "BdmRegError",
    "BdmState",
    "BlockCounts",
    "ConstantCtmTable",
    "CtmTable",
    "DegenerateLabels",
    "DimensionMismatch",
    "EdgeList",
    "EmptyGraph",
    "EmptyTable",
    "GradientSample",
    "GraphAutoencoder",
    "GraphData",
    "MissingBlock",
    "NotEnoughNonEdges",
    "ParseError",
    "RegConfig",
    "RunOutcome",
    "RunStatus",
    "SplitData",
    "TooLarge",
    "TrainConfig",
    "TrainingDiverged",
    "TrialResult",
    "TuringMachine",
    "ZeroHaltingMachines",
    "adam_init",
    "adam_step",
    "apply_flip",
    "auc",
    "average_ctm",
    "average_precision",
    "backward",
    "bdm",
    "bdm_string",
    "block_key_string",
    "build_ctm_table",
    "cw_value",
    "decode",
    "encode",
    "enumerate_distribution",
    "exact_expected_bdm",
    "exact_gradient",
    "flip_delta",
    "forward",
    "gcn_normalize",
    "glorot_init",
    "grad_sample",
    "init_params",
    "iter_machines",
    "load_ctm_table",
    "load_weights",
    "lookup",
    "loss",
    "machine_count",
    "make_state",
    "parse_edge_list",
    "partition",
    "reg_backward",
    "reg_term",
    "run_tm",
    "sample_adjacency",
    "save_ctm_table",
    "score_edges",
    "save_weights",
    "split",
    "to_graph_data",
    "train",
]
