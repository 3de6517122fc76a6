"""brauersim: random Brauer diagrams, exactly verified.

Uniform perfect matchings concatenated into diagrams; components
classified into loops, slings, and the transverse string; loop shapes
recognized by a two-row automaton; every limit constant evaluated in
exact rational arithmetic; and a streaming renewal-based simulator
cross-checked against brute-force and Markov oracles.
"""

__version__ = "0.1.0"
