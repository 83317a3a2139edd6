"""Proof-of-Execution consensus state machines.

- messages: protocol message and block value types
- codec: canonical binary encoding of every message
- datastore: key-value execution target with undo support
- ledger: hash-chained block store
- replica: normal-case state machine (propose/support/certify/execute)
- view_change: failure detection, new-view proposal and adoption
- checkpoint: periodic checkpoints and state transfer
- client: request submission and proof-of-execution collection
"""
