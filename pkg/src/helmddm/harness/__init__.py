from .records import RunRecord, write_records, read_records, SCHEMA_VERSION
from .suites import SUITES, run_suite
from .compare import compare_against_reference

__all__ = ["RunRecord", "write_records", "read_records", "SCHEMA_VERSION",
           "SUITES", "run_suite", "compare_against_reference"]
