"""Configuration, ingestion, orchestration and reporting."""
