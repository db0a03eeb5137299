"""Figure scripts over beckflow run directories; plotting only, no science."""

from .records import RecordError, RunRecord, Table, load_record

__version__ = "0.1.0"
