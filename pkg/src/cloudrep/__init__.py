"""Multi-cloud data replication simulator (TCDRM strategy and NoRepLc baseline)."""

__version__ = "0.1.0"
