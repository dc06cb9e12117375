from typing import List

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    threads: int = 1
    log_level: str = "WARNING"
    # safety cap for the interval fixpoint and the interprocedural worklists
    max_fixpoint_rounds: int = 100_000
    check_monotonic: bool = False
    fast_subsumption: bool = True
    bench_seed: int = 0
    bench_sizes: List[int] = [10_000, 20_000, 40_000, 80_000, 160_000]
    bench_single_use_fraction: float = 0.85
    bench_function_size: int = 120

    class Config:
        env_file = ".env"
        env_prefix = "DFI_"
        extra = "ignore"

settings = Settings() # type: ignore
