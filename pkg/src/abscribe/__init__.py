"""abscribe: non-linear revision engine for human-AI co-writing.

Documents hold multiple variations of text segments in place, LLM
instructions are reified into reusable prompt buttons, and generated text
streams into the draft for in-context review.
"""

__version__ = "0.1.0"
