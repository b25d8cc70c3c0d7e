"""Generative MIDI co-performance engine.

Listens to a performer over MIDI, generates continuations of the
performance state with a small mixture-density recurrent network, and
routes the results back out to instruments under a configurable mapping.
"""

__version__ = "0.1.0"
