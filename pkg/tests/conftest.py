"""Shared test configuration."""

from hypothesis import settings

# Property tests share a process with JIT compilation; wall-clock deadlines
# would flag the first example of a run as slow, so they are disabled.
settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")
