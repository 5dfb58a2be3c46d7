"""Exact-arithmetic toolkit for probabilistic pushdown processes.

Markov chains with rational probabilities, PCTL with sound three-valued
bounded evaluation, stateless pushdown processes, and a compiler that turns
word-matching (PCP) instances into pushdown models whose formula
probabilities certify solutions.
"""
from .chain import (
    Budget,
    ChainGenerator,
    ExploreResult,
    FinitePath,
    InvalidPathError,
    Violation,
    explore,
    path_probability,
    validate_distribution,
)
from .pctl import (
    And,
    Atom,
    BoundPlaceholder,
    Comparison,
    Next,
    Not,
    Prob,
    ProbInterval,
    ThreeValued,
    TrueFormula,
    Until,
    compare,
    eval_state,
    parse_formula,
    parse_path_formula,
    prob_next,
    prob_until,
    serialize_formula,
)
from .pushdown import (
    Bpa,
    BpaRule,
    Configuration,
    Dfa,
    Ppds,
    PpdsRule,
    RegularAssignment,
    SimpleAssignment,
    embed_bpa,
    eval_assignment,
    induced_chain,
    parse_model,
    serialize_model,
    step,
    validate_model,
)
from .reduction import (
    CertifyReport,
    PaddedInstance,
    PcpInstance,
    ReductionArtifact,
    Variant,
    VariantKind,
    certify,
    check_solution,
    compile_instance,
    erase_pad,
    guess_config,
    guess_path,
    guess_path_probability,
    instantiate_top_formula,
    pad,
    rho,
    rho_bar,
    theta,
    theta_bar,
)
from .oracle import (
    Corpus,
    brute_force_pcp,
    corpus_check,
    enumerate_until_probability,
    load_corpus,
    search_via_reduction,
)

__version__ = "0.1.0"
