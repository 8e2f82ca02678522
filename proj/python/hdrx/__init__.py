"""Header extraction, flow-pair aggregation and traffic-matrix collection."""

from ._core import (
    Aggregator,
    AnonymizerKey,
    CaptureError,
    CaptureFile,
    CaptureRecord,
    DecodeError,
    ParseStats,
    PipelineError,
    PipelineResult,
    RateReport,
    RateRow,
    SummaryPacket,
    TrafficMatrix,
    anonymize,
    bench_ladder,
    compute_rates,
    decode_summary,
    encode_summary,
    pad_packet,
    parse,
    parse_stream,
    read_capture,
    run_pipeline,
    simulate_slot_model,
    synthesize_uniform,
    theoretical_drop_rate,
    write_capture,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
