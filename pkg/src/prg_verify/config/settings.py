"""Configuration settings for the verification toolkit."""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables."""

    # Enumeration cap for traces, policies and basis combinations (PRG_CAP)
    cap: int = 1_000_000

    star_max_iterations: int = 64
    max_simplex_dimension: int = 12

    # Sieve case study
    sieve_max_n: int = 36
    sieve_cross_check_max_n: int = 15
    sieve_verify_max_composites: int = 10

    monte_carlo_step_cap: int = 10_000

    log_level: str = "INFO"

    class Config:
        env_file = ".env"
        env_prefix = "PRG_"


settings = Settings()
