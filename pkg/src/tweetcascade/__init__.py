"""Opinion mining over hashtag-collected tweets: ingest, annotate, classify, aggregate."""

__version__ = "0.1.0"
