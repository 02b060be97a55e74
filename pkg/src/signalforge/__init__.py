"""signalforge: vehicle signal catalogs and API contracts, compiled into
validated endpoint implementations, plus the workflow-graph optimizer that
models and scores the coordination structure around the pipeline."""

from .catalog import (
    ByteOrder,
    SignalCatalog,
    SignalDef,
    SignalKind,
    load_catalog,
    parse_catalog,
    rewrite_description,
    serialize_catalog,
)
from .codec import (
    CodecExpr,
    SynthesisReport,
    TestVector,
    debug_loop,
    decode_value,
    encode_value,
    generate_test_vectors,
    synthesize_codec,
    validate_codec,
)
from .providers import (
    CompletionProvider,
    CompletionRequest,
    CompletionResult,
    FaultPlan,
    FaultingProvider,
    RecordingProvider,
    RemoteHttpProvider,
    ReplayProvider,
    RuleProvider,
    UsageMeter,
    build_provider,
)

__version__ = "0.1.0"
