from editflow.twin.protocol import (
    PROTOCOL_VERSION,
    RecommendationBatch,
    SutRequest,
    batch_from_dict,
    batch_to_dict,
    request_from_dict,
    request_to_dict,
)
from editflow.twin.suts import MockSut, NoiseProfile, ReplaySut, SubprocessSut, load_replay_script
from editflow.twin.simulate import (
    SimConfig,
    SimulationStep,
    SimulationTrace,
    load_trace,
    simulate,
    trace_from_dict,
    trace_to_dict,
    write_trace,
)

__all__ = [
    "MockSut",
    "NoiseProfile",
    "PROTOCOL_VERSION",
    "RecommendationBatch",
    "ReplaySut",
    "SimConfig",
    "SimulationStep",
    "SimulationTrace",
    "SubprocessSut",
    "SutRequest",
    "batch_from_dict",
    "batch_to_dict",
    "load_replay_script",
    "load_trace",
    "request_from_dict",
    "request_to_dict",
    "simulate",
    "trace_from_dict",
    "trace_to_dict",
    "write_trace",
]
