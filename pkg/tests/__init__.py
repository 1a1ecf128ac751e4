"""Tests for the sebalab package.

Run them with pytest from the project root, which puts the package on
the path the way an external import would see it. The slower numerical
experiments share their spectra through session fixtures in
``conftest.py``.
"""
