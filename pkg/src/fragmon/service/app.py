"""HTTP front end over the pipeline.

Stateless endpoints mirror the CLI subcommands. ``/fragments`` is a small
in-memory collector that merges fragment files uploaded by several
installations, keyed by condition-set hash.
"""

from __future__ import annotations

import io
import logging
import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__
from ..callgraph import build_call_graph, relevant_set
from ..harness.evaluate import Bounds, run_pipeline
from ..harness.generator import GeneratorParams, generate_source, generate_subject
from ..monitor.fragments import FragmentFormatError, FragmentSet, parse_fragment_lines, write_fragments
from ..monitor.policy import RecordingPolicy
from ..monitor.runtime import run_monitored
from ..reconstruct.automaton import UnknownEventError, build_event_automaton
from ..reconstruct.chains import reconstruct, write_traces
from ..subject import parse_program
from ..subject.errors import ConfigurationError, ProgramError
from ..symexec.conditions import (ConditionFileError, format_conditions, parse_conditions,
                                  program_hash, synthesize)
from . import schemas as S

log = logging.getLogger("fragmon.service")


def _policy(m: S.PolicyModel) -> RecordingPolicy:
    return RecordingPolicy.from_dict(m.model_dump())


def _header_hash(text: str) -> str:
    for line in text.splitlines():
        if line.startswith("# cshash "):
            return line.split(" ", 2)[2].strip()
    raise ConditionFileError("condition file has no cshash header")


class Collector:
    """Accumulated fragments per condition-set hash."""

    def __init__(self):
        self._lock = threading.Lock()
        self._sets: dict[str, FragmentSet] = {}

    def add(self, fs: FragmentSet) -> FragmentSet:
        with self._lock:
            cur = self._sets.get(fs.cshash, FragmentSet((), fs.cshash))
            merged = FragmentSet.merge([cur, fs])
            merged.validate()
            self._sets[fs.cshash] = merged
            return merged

    def get(self, cshash: str) -> FragmentSet:
        with self._lock:
            return self._sets.get(cshash, FragmentSet((), cshash))

    def clear(self) -> None:
        with self._lock:
            self._sets.clear()


def create_app() -> FastAPI:
    app = FastAPI(title="fragmon", version=__version__)
    collector = Collector()
    app.state.collector = collector

    @app.exception_handler(ProgramError)
    @app.exception_handler(ConfigurationError)
    @app.exception_handler(ConditionFileError)
    @app.exception_handler(FragmentFormatError)
    @app.exception_handler(UnknownEventError)
    @app.exception_handler(ValueError)
    async def _validation(request: Request, exc: Exception):
        return JSONResponse(status_code=422, content={"detail": str(exc), "error": type(exc).__name__})

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception):
        log.exception("internal error on %s", request.url.path)
        return JSONResponse(status_code=500, content={"detail": str(exc), "error": type(exc).__name__})

    @app.get("/health", response_model=S.HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/synth", response_model=S.SynthResponse)
    def synth(req: S.SynthRequest):
        program = parse_program(req.program)
        rel = relevant_set(build_call_graph(program), program.interfaces_of_interest, req.depth)
        cs = synthesize(program, rel, req.loop_bound, req.inline_depth)
        return {
            "conditions": cs.forms,
            "cshash": cs.hash,
            "program_hash": program_hash(program),
            "relevant_methods": sorted(str(m) for m in rel.methods),
            "file": format_conditions(cs, program),
        }

    @app.post("/monitor", response_model=S.MonitorResponse)
    def monitor(req: S.MonitorRequest):
        program = parse_program(req.program)
        cs = parse_conditions(req.conditions, program).conditions
        policy = _policy(req.policy)
        sets, runs = [], []
        for seed in req.seeds:
            r = run_monitored(program, cs, policy, seed, installation_id=req.installation)
            sets.append(r.fragments)
            runs.append({"seed": seed, **r.stats.to_dict(), "fault": r.fault})
        merged = FragmentSet.merge(sets)
        merged = FragmentSet(merged.fragments, cs.hash)
        buf = io.StringIO()
        write_fragments(merged, buf, production=req.production)
        return {"cshash": cs.hash, "fragment_count": len(merged), "fragments": buf.getvalue(), "runs": runs}

    @app.post("/reconstruct", response_model=S.ReconstructResponse)
    def reconstruct_(req: S.ReconstructRequest):
        automaton = None
        expected = None
        if req.program is not None:
            program = parse_program(req.program)
            automaton = build_event_automaton(program)
            if req.conditions is not None:
                expected = parse_conditions(req.conditions, program).conditions.hash
        elif req.conditions is not None:
            expected = _header_hash(req.conditions)
        sets = [parse_fragment_lines(text.splitlines(), expected) for text in req.fragments]
        merged = FragmentSet.merge(sets)
        traces = reconstruct(merged, req.max_chain_length, req.max_outputs, automaton)
        buf = io.StringIO()
        write_traces(traces, merged.cshash, buf)
        return {"cshash": merged.cshash, "fragment_count": len(merged), "trace_count": len(traces),
                "traces": buf.getvalue()}

    @app.post("/gen", response_model=S.GenResponse)
    def gen(req: S.GenRequest):
        params = GeneratorParams(**req.model_dump())
        source = generate_source(params)
        return {"source": source, "program_hash": program_hash(parse_program(source))}

    @app.post("/eval", response_model=S.EvalResponse)
    def eval_(req: S.EvalRequest):
        if req.program is not None:
            program = parse_program(req.program)
        else:
            program = generate_subject(GeneratorParams(rng_seed=req.seed, allow_faults=req.allow_faults))
        b = req.bounds
        bounds = Bounds(b.max_chain_length, b.max_outputs, b.depth, b.loop_bound, b.inline_depth)
        res = run_pipeline(program, req.runs, _policy(req.policy), bounds)
        out = {"metrics": res.metrics.to_dict()}
        if req.include_artifacts:
            frag_buf, trace_buf = io.StringIO(), io.StringIO()
            write_fragments(res.fragments, frag_buf)
            write_traces(res.traces, res.fragments.cshash, trace_buf)
            out.update(program=program.source, conditions=format_conditions(res.conditions, program),
                       fragments=frag_buf.getvalue(), traces=trace_buf.getvalue())
        return out

    @app.post("/fragments", response_model=S.CollectResponse)
    def collect(req: S.CollectRequest):
        fs = parse_fragment_lines(req.fragments.splitlines())
        if not len(fs):
            raise HTTPException(status_code=422, detail="no fragments in upload")
        merged = collector.add(fs)
        return {"cshash": fs.cshash, "accepted": len(fs), "total": len(merged),
                "installations": sorted(merged.installations)}

    @app.get("/fragments/{cshash}", response_class=PlainTextResponse)
    def collected(cshash: str):
        buf = io.StringIO()
        write_fragments(collector.get(cshash), buf)
        return buf.getvalue()

    @app.delete("/fragments")
    def reset():
        collector.clear()
        return {"status": "cleared"}

    return app


app = create_app()
