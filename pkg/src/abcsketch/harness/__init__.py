"""CLI, file formats and orchestration."""
from .io import (EQUATOR_SCHEMA, TRADEOFF_SCHEMA, RunConfig, StreamFile, StreamFormatError,
                 format_csv, write_csv)
from .parallel import parallel_map, worker_count

__all__ = ["EQUATOR_SCHEMA", "TRADEOFF_SCHEMA", "RunConfig", "StreamFile", "StreamFormatError",
           "format_csv", "write_csv", "parallel_map", "worker_count"]
