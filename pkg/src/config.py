from pathlib import Path
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

ROOT_DIR = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    num_threads: int = Field(
        default=1, ge=1, description="Worker threads for restarts, multistarts and corpora"
    )
    log_level: str = "INFO"
    output_dir: Path = Path("runs")
    show_progress: bool = True  # tqdm bars on long loops

    model_config = SettingsConfigDict(
        env_file=ROOT_DIR / ".env",
        env_file_encoding="utf-8",
        env_prefix="NSCONV_",
        extra="ignore",
    )


settings = Settings()
