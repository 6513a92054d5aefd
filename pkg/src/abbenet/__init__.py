"""Attribute-based broadcast encryption with named-data content delivery.

Subpackages/modules:

- ``pairing``  — BN curve generation, G1/G2/GT arithmetic, optimal ate pairing
- ``abbe``     — the key-encapsulation scheme (setup/keygen/encapsulate/decapsulate)
- ``formats``  — JSON schemas and canonical serialization of artifacts
- ``content``  — hybrid AES-GCM file encryption keyed by encapsulated sessions
- ``ndn``      — in-process named-data forwarder, producers and consumers
- ``rooms``    — policy-addressed virtual chatrooms on top of the above
- ``cli``      — command-line entry points
- ``bench``    — reproducible performance experiments
"""

__version__ = "0.1.0"
