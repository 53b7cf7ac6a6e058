"""
Test suite for netnl.

Unit tests cover each service module; integration tests run whole
scenarios and the command-line interface.
"""
