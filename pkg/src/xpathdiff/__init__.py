"""Differential testing of XPath engines over randomly generated XML.

The pipeline: generate a random document from node templates, grow targeted
XPath queries whose predicates are rectified to keep results non-empty, run
every configured engine on the (document, query) pair, compare normalized
node-id outputs, and fingerprint, record, replay, and reduce discrepancies.
"""

from .campaign import (
    CampaignConfig,
    CampaignReport,
    derive_seed,
    load_config,
    make_reduction_check,
    regenerate_case,
    replay_record,
    run_campaign,
    stats_table,
    witness_pair,
)
from .docgen import DocGenConfig, NodeTemplate, generate_document, generate_templates, instantiate_node
from .evaluator import evaluate, evaluate_ids, evaluate_subexpr, make_context
from .harness import (
    Discrepancy,
    EngineConfigError,
    EngineResult,
    EngineSpec,
    TestCase,
    builtin_engine,
    compare,
    fingerprint,
    mutant_engine,
    run_engine,
)
from .mutations import MUTATIONS, apply_mutation
from .querygen import (
    GenConfig,
    GenTrace,
    applicable_axes,
    generate_positional_predicate,
    generate_predicate,
    generate_query,
    generate_section_prefix,
    rectify_predicate,
    select_target,
)
from .reducer import ReductionCheck, reduce_case
from .seteval import evaluate_strategy_b
from .values import EvalError, Value, compare_general, effective_boolean
from .xmldoc import (
    ElementNode,
    ParseError,
    TypedValue,
    XmlDocument,
    XmlModelError,
    document_order_dedup,
    navigate_axis,
    parse,
    serialize,
)
from .xpathast import (
    Predicate,
    Section,
    SectionPrefix,
    XPathExpr,
    XPathStandard,
    render,
    validate_expr,
)

__version__ = "0.1.0"
