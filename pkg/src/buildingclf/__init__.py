"""Building type/function classification from GIS footprints.

Pipeline: GeoJSON ingestion -> shape/context features -> localized
subgraph dataset -> semi-supervised classifiers -> imbalance-aware
evaluation. See README.md for the CLI walk-through.
"""

__version__ = "0.1.0"
