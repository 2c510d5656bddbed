"""Privacy-preserving preparation of segmented endoscopic recordings.

Merges per-case video segments, finds out-of-body footage, blurs it,
strips metadata, and files the result under a pseudonym. Ships a CLI,
a loopback review service, and a benchmark harness.
"""

__version__ = "1.0.0"
