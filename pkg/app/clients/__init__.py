from .base import ClientAnalysis, Edge
from .loader import ClientRegistry, create_client, load_all_clients
from .roarg import RoArgClient, run_roarg
from .taint import (
    TaintClient, TaintConfig, TaintSink, TaintSource, load_taint_config, parse_taint_config, run_taint,
)

__all__ = [
    "ClientAnalysis", "Edge",
    "ClientRegistry", "create_client", "load_all_clients",
    "RoArgClient", "run_roarg",
    "TaintClient", "TaintConfig", "TaintSink", "TaintSource",
    "load_taint_config", "parse_taint_config", "run_taint",
]
