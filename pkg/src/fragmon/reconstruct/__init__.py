"""Offline trace reconstruction."""

from .automaton import EventAutomaton, UnknownEventError, build_event_automaton, cfg_feasible
from .chains import (DEFAULT_MAX_CHAIN, DEFAULT_MAX_OUTPUTS, ReconstructedTrace, build_trace,
                     can_concat, concatenate, enumerate_chains, read_traces, reconstruct,
                     write_traces)

__all__ = [
    "EventAutomaton", "UnknownEventError", "build_event_automaton", "cfg_feasible",
    "DEFAULT_MAX_CHAIN", "DEFAULT_MAX_OUTPUTS", "ReconstructedTrace", "build_trace",
    "can_concat", "concatenate", "enumerate_chains", "read_traces", "reconstruct",
    "write_traces",
]
