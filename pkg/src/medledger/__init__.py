"""Patient-controlled healthcare data ledger.

Access policies and record pointers live on a PBFT-ordered permissioned
chain; encrypted records live in a content-addressed off-chain store; a
deterministic discrete-event simulator wires patients, staff, ledger replicas
and storage nodes together for reproducible protocol and attack scenarios.
"""

__version__ = "0.1.0"
