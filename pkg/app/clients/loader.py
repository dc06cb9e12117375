# app/clients/loader.py
"""
Client Loader - registry of client analyses by name

The CLI resolves `--client NAME` here; tests may register extra clients.
"""

import logging
from typing import Dict, List, Optional, Type

from app.clients.base import ClientAnalysis
from app.clients.roarg import RoArgClient
from app.clients.taint import TaintClient, TaintConfig
from app.ir.errors import UnknownSymbolError

logger = logging.getLogger(__name__)


class ClientRegistry:
    """
    Singleton mapping client names to ClientAnalysis classes
    """

    _instance = None
    _initialized = False

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if not self._initialized:
            self.clients: Dict[str, Type[ClientAnalysis]] = {}
            self._initialized = True

    def register(self, name: str, cls: Type[ClientAnalysis]) -> None:
        self.clients[name] = cls
        logger.debug(f"  ✅ Registered client: {name}")

    def get(self, name: str) -> Optional[Type[ClientAnalysis]]:
        return self.clients.get(name)

    def list_clients(self) -> List[str]:
        return list(self.clients)

    def count(self) -> int:
        return len(self.clients)


_client_registry = ClientRegistry()


def load_all_clients() -> ClientRegistry:
    """Register the built-in clients once"""
    if _client_registry.count() > 0:
        return _client_registry
    _client_registry.register("taint", TaintClient)
    _client_registry.register("roarg", RoArgClient)
    logger.debug(f"Clients ready: {', '.join(_client_registry.list_clients())}")
    return _client_registry


def create_client(name: str, taint_config: Optional[TaintConfig] = None) -> ClientAnalysis:
    """
    Instantiate a client by name

    Raises:
        UnknownSymbolError: no client registered under name
    """
    registry = load_all_clients()
    cls = registry.get(name)
    if cls is None:
        raise UnknownSymbolError(
            f"unknown client '{name}' (available: {', '.join(registry.list_clients())})"
        )
    if cls is TaintClient:
        return TaintClient(taint_config)
    return cls()
