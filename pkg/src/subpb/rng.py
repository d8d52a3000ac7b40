"""Named deterministic random streams.

Every randomized branch of the pipeline derives its own stream from
(seed, labels...) so runs are reproducible and branches are independent
of evaluation order. Derivation hashes the label path; Python's builtin
`hash` is salted per process and must not be used here.
"""

from __future__ import annotations

import hashlib
import random


def stream(seed: int, *labels: object) -> random.Random:
    """Fresh RNG for the branch identified by `labels` under `seed`."""
    key = "/".join([repr(int(seed))] + [str(label) for label in labels])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))
