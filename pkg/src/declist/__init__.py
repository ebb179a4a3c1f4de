"""Decision-list representation, analysis, encoding audits, and compression."""

from .analysis import (
    IndexDistribution,
    InequalityRecord,
    InequalityReport,
    bridging_check,
    dnf_useful_terms_check,
    expected_usenum,
    general_bridging_check,
    hit_distribution,
    hypercontractivity_check,
    index_stability,
    is_dnf_shaped,
    sum_identities_check,
    useful_distribution,
    useful_indices,
    usenum,
)
from .compress import (
    CompressionResult,
    SizeBound,
    distance,
    min_size_for_error,
    rank_by_hit,
    size_bound_for_error,
    sparsify_dnf,
    take_top,
)
from .core import (
    DEFAULT_SEED,
    Assignment,
    DecisionList,
    DecisionListError,
    EnumerationLimitError,
    ExactStars,
    ParseError,
    RandomSource,
    Restriction,
    RestrictedList,
    Rule,
    Term,
    UniformStars,
    batch_index_of,
    parse_decision_list,
    restrict,
    restriction_limit,
    sample_noisy,
    sample_restriction,
    serialize_decision_list,
    sweep_limit,
)
from .encoding import (
    NEW,
    OLD,
    AuditReport,
    CodePair,
    CountingRecord,
    DecodeError,
    EncodedPair,
    counting_bound,
    decode,
    encode,
    roundtrip_audit,
)
from .generators import (
    gen_from_truth_table,
    gen_lv,
    gen_random_list,
    gen_threshold_dnf,
    gen_tribes,
)

__version__ = "0.1.0"
