"""
Batch pipeline: config schema, extraction orchestration, reports and the
management commands (synth, extract, extract_deform, extract_collage, fit,
evaluate).
"""
