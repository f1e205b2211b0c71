"""contractloop: contract-driven orchestration for LLM-assisted code generation.

Pipeline: decompose an intent into tasks, generate and review contracts,
generate code under contract guidance, derive tests from contracts, and
verify execution against them, feeding violations back into repair.
"""

__version__ = "0.1.0"
