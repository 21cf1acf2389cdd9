"""Newline-delimited JSON evaluation protocol (stdio or TCP).

One request line yields exactly one response line, whatever the input:
malformed bytes produce an error object, never a crash. Requests:

    {"op": "settings", "problem": N}
        -> {"problem", "D", "M", "lower", "upper", "objectives",
            "population_size"}
    {"op": "evaluate", "problem": N, "X": [[32 ints], ...],
     "seed": S, "raw": false}
        -> {"F": [[M floats], ...]}   (normalized unless raw is true)

Invalid genotypes are reported per row:
    {"errors": [{"error": "invalid", "index": i}, ...]}
"""
from __future__ import annotations

import json
import socket
import sys

import numpy as np

from . import encoding, problems
from .directions import population_size
from .errors import DegenerateArchitecture, DomainError, ShapeError, UnknownProblem


class ProtocolServer:
    def __init__(self, evaluators: problems.Evaluators):
        self.evaluators = evaluators

    def handle_line(self, line: str) -> dict:
        line = line.strip()
        if not line:
            return {"error": "empty_request"}
        try:
            req = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return {"error": "parse_error"}
        if not isinstance(req, dict):
            return {"error": "bad_request", "detail": "request must be an object"}
        op = req.get("op")
        if op == "settings":
            return self._settings(req)
        if op == "evaluate":
            return self._evaluate(req)
        return {"error": "unknown_op"}

    def _problem(self, req):
        if "problem" not in req:
            raise ShapeError("missing 'problem'")
        return problems.get_problem(req["problem"])

    def _settings(self, req) -> dict:
        try:
            p = self._problem(req)
        except (UnknownProblem, ShapeError) as exc:
            return {"error": "bad_request", "detail": str(exc)}
        lower, upper = encoding.bounds()
        n, _, _ = population_size(p.M)
        return {
            "problem": p.id,
            "D": p.D,
            "M": p.M,
            "lower": lower.tolist(),
            "upper": upper.tolist(),
            "objectives": list(p.objectives),
            "population_size": n,
        }

    def _evaluate(self, req) -> dict:
        try:
            p = self._problem(req)
        except (UnknownProblem, ShapeError) as exc:
            return {"error": "bad_request", "detail": str(exc)}
        X = req.get("X")
        if not isinstance(X, list) or not X:
            return {"error": "bad_request", "detail": "'X' must be a non-empty list of rows"}
        seed = req.get("seed", 0)
        if not isinstance(seed, int):
            return {"error": "bad_request", "detail": "'seed' must be an integer"}
        row_errors = []
        genes = []
        for i, row in enumerate(X):
            try:
                genes.append(encoding.validate(row))
            except (DomainError, DegenerateArchitecture, ShapeError, ValueError, TypeError):
                row_errors.append({"error": "invalid", "index": i})
        if row_errors:
            return {"errors": row_errors}
        raw, norm = problems.evaluate_batch(p, genes, self.evaluators, seed=seed)
        F = raw if req.get("raw") else norm
        return {"F": [[float(v) for v in row] for row in F]}

    # -- transports ---------------------------------------------------------

    def serve_stream(self, instream, outstream):
        """Sequential request/response over text streams until EOF."""
        for line in instream:
            response = self.handle_line(line)
            outstream.write(json.dumps(response) + "\n")
            outstream.flush()

    def serve_stdio(self):
        self.serve_stream(sys.stdin, sys.stdout)

    def serve_tcp(self, host: str = "127.0.0.1", port: int = 0, ready=None,
                  max_connections=None):
        """One connection at a time; requests processed in arrival order."""
        with socket.create_server((host, port)) as server:
            server.listen(1)
            if ready is not None:
                ready(server.getsockname()[1])
            served = 0
            while max_connections is None or served < max_connections:
                conn, _ = server.accept()
                served += 1
                with conn, conn.makefile("r", encoding="utf-8", errors="replace") as rd, \
                        conn.makefile("w", encoding="utf-8") as wr:
                    try:
                        self.serve_stream(rd, wr)
                    except (BrokenPipeError, ConnectionResetError):
                        pass
