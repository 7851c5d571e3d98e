"""tarjim: Arabic-English parallel-corpus cleaning, training-data
composition, WMT-compatible scoring, and benchmark tooling."""

__version__ = "0.1.0"

from .records import BenchmarkEntry, ManifestStats, Origin, ParallelPair, Split  # noqa: F401
