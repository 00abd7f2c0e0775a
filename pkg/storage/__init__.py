from .artifacts import (
    ResultStore,
    dump_json,
    observed_frame,
    observed_from_frame,
    read_observed_csv,
    table_csv,
    write_observed_csv,
)

__all__ = [
    "ResultStore",
    "dump_json",
    "observed_frame",
    "observed_from_frame",
    "read_observed_csv",
    "table_csv",
    "write_observed_csv",
]
