"""Bridge to an external SMT solver speaking SMT-LIB2 over stdin/stdout.

Scripts are rendered deterministically.  Two execution modes exist:

* one process per query, for any user-supplied solver command
  (``--solver-cmd`` / ``EFMCT_SOLVER``), killed at the configured timeout;
* a persistent adapter process around the WebAssembly build of Z3 from the
  ``z3-solver`` npm package, used by default.  Each query still gets a fresh
  solver context; the adapter merely amortizes the WASM startup cost, and is
  killed and respawned if a query overruns its deadline.
"""

from __future__ import annotations

import atexit
import base64
import json
import os
import re
import shlex
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from . import formula as F
from .formula import Formula
from .smttext import render_term, symbol
from .sorts import NATURAL, SortKind, Variable

SOLVER_ENV_VAR = "EFMCT_SOLVER"
DEFAULT_TIMEOUT_MS = 10_000


class SatResult(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"
    ERROR = "error"


class Validity(Enum):
    VALID = "valid"
    INVALID = "invalid"
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"
    ERROR = "error"


@dataclass(frozen=True)
class SmtVerdict:
    result: SatResult
    wall_ms: float
    diagnostic: str = ""


@dataclass(frozen=True)
class ValidityVerdict:
    result: Validity
    wall_ms: float
    diagnostic: str = ""

    @property
    def is_valid(self) -> bool:
        return self.result is Validity.VALID


@dataclass(frozen=True)
class SolverConfig:
    """How to reach a solver.  command=None selects the bundled adapter."""

    command: tuple[str, ...] | None = None
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    logic: str = "ALL"
    seed: int | None = None
    enum_encoding: str = "datatype"  # or "integer"

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        if self.enum_encoding not in ("datatype", "integer"):
            raise ValueError(f"unknown enum encoding {self.enum_encoding!r}")

    @classmethod
    def from_environment(cls, **overrides) -> "SolverConfig":
        raw = os.environ.get(SOLVER_ENV_VAR, "").strip()
        if raw and "command" not in overrides:
            overrides["command"] = tuple(shlex.split(raw))
        return cls(**overrides)


def emit_smtlib(
    f: Formula,
    decls: Iterable[Variable],
    config: SolverConfig | None = None,
) -> str:
    """Deterministic SMT-LIB2 script asserting f over the declared constants."""
    config = config or SolverConfig()
    decl_list = sorted(set(decls))
    declared_ids = {v.id for v in decl_list}
    missing = [v.id for v in sorted(F.free_vars(f)) if v.id not in declared_ids]
    if missing:
        raise F.FormulaError(f"undeclared free variables: {', '.join(missing)}")
    F.check_boolean(f)

    lines: list[str] = []
    lines.append(f"(set-option :timeout {config.timeout_ms})")
    if config.seed is not None:
        lines.append(f"(set-option :random-seed {config.seed})")
    if config.logic:
        lines.append(f"(set-logic {config.logic})")
    enum_sorts = sorted(
        {v.sort for v in decl_list if v.sort.kind is SortKind.ENUMERATION}
        | set(F.all_enum_sorts(f)),
        key=lambda s: s.enum_name,
    )
    for sort in enum_sorts:
        if config.enum_encoding == "datatype":
            ctors = " ".join(f"({symbol(v)})" for v in sort.enum_values)
            lines.append(f"(declare-datatypes (({symbol(sort.enum_name)} 0)) (({ctors})))")
    for v in decl_list:
        if v.sort.kind is SortKind.BOOLEAN:
            sort_text = "Bool"
        elif v.sort.kind is SortKind.REAL:
            sort_text = "Real"
        elif v.sort.kind is SortKind.NATURAL:
            sort_text = "Int"
        elif config.enum_encoding == "integer":
            sort_text = "Int"
        else:
            sort_text = symbol(v.sort.enum_name)
        lines.append(f"(declare-const {symbol(v.id)} {sort_text})")
    for v in decl_list:
        if v.sort == NATURAL:
            lines.append(f"(assert (>= {symbol(v.id)} 0))")
        elif v.sort.kind is SortKind.ENUMERATION and config.enum_encoding == "integer":
            lines.append(
                f"(assert (and (>= {symbol(v.id)} 0) (<= {symbol(v.id)} {len(v.sort.enum_values) - 1})))"
            )
    lines.append(f"(assert {render_term(f, config.enum_encoding, for_solver=True)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


_VERDICT_TOKEN = re.compile(r"\b(sat|unsat|unknown)\b")


def _classify_output(out: str, err: str, wall_ms: float, timeout_ms: int) -> SmtVerdict:
    match = _VERDICT_TOKEN.search(out)
    error_pos = out.find("(error")
    if error_pos != -1 and (match is None or error_pos < match.start()):
        return SmtVerdict(SatResult.ERROR, wall_ms, diagnostic=(out + "\n" + err).strip())
    if match is None:
        diag = ("no verdict in solver output: " + (out + err)[:500]).strip()
        return SmtVerdict(SatResult.ERROR, wall_ms, diagnostic=diag)
    verdict = SatResult(match.group(1))
    if verdict is SatResult.UNKNOWN and wall_ms >= 0.95 * timeout_ms:
        # The solver gave up because its time budget ran out.
        return SmtVerdict(SatResult.TIMEOUT, wall_ms, diagnostic=err.strip())
    return SmtVerdict(verdict, wall_ms, diagnostic=err.strip())


# --- bundled adapter ---------------------------------------------------------


def _adapter_path() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    return os.path.join(here, "solveradapter", "adapter.js")


_node_path_cache: str | None = None


def _node_path() -> str:
    """NODE_PATH value under which `require('z3-solver')` resolves."""
    global _node_path_cache
    if _node_path_cache is not None:
        return _node_path_cache
    candidates = [os.environ.get("NODE_PATH", "")]
    try:
        probe = subprocess.run(
            ["node", "-e", "require.resolve('z3-solver')"],
            capture_output=True, text=True, timeout=30,
        )
        if probe.returncode == 0:
            _node_path_cache = os.environ.get("NODE_PATH", "")
            return _node_path_cache
    except (OSError, subprocess.TimeoutExpired):
        pass
    try:
        root = subprocess.run(
            ["npm", "root", "-g"], capture_output=True, text=True, timeout=60
        ).stdout.strip()
        if root:
            candidates.append(root)
    except (OSError, subprocess.TimeoutExpired):
        pass
    _node_path_cache = os.pathsep.join(c for c in candidates if c)
    return _node_path_cache


def bundled_solver_command(oneshot: bool = True) -> tuple[str, ...]:
    mode = "--oneshot" if oneshot else "--server"
    return ("node", _adapter_path(), mode)


class SolverUnavailable(Exception):
    pass


class _AdapterSession:
    """One persistent adapter process; every query gets a fresh solver context."""

    def __init__(self) -> None:
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()

    def _start(self) -> subprocess.Popen:
        if shutil.which("node") is None:
            raise SolverUnavailable("node is not on PATH; install node or set EFMCT_SOLVER")
        env = dict(os.environ)
        node_path = _node_path()
        if node_path:
            env["NODE_PATH"] = node_path
        proc = subprocess.Popen(
            ["node", _adapter_path(), "--server"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            env=env,
        )
        banner = proc.stdout.readline() if proc.stdout else ""
        if banner.strip() != "ready":
            err = proc.stderr.read() if proc.stderr else ""
            proc.kill()
            raise SolverUnavailable(f"solver adapter failed to start: {(banner + err).strip()}")
        return proc

    def kill(self) -> None:
        with self._lock:
            if self._proc is not None:
                try:
                    self._proc.kill()
                    self._proc.wait(timeout=5)
                except OSError:
                    pass
                self._proc = None

    def query(self, script: str, deadline_s: float) -> tuple[str, str, bool]:
        """Returns (out, err, timed_out)."""
        with self._lock:
            if self._proc is None or self._proc.poll() is not None:
                self._proc = self._start()
            proc = self._proc
            request = base64.b64encode(script.encode("utf-8")).decode("ascii") + "\n"
            reply: dict[str, str] = {}
            done = threading.Event()

            def reader() -> None:
                line = proc.stdout.readline() if proc.stdout else ""
                if line:
                    try:
                        reply.update(json.loads(line))
                    except json.JSONDecodeError:
                        reply.update({"out": "", "err": f"malformed adapter reply: {line!r}"})
                done.set()

            thread = threading.Thread(target=reader, daemon=True)
            thread.start()
            try:
                proc.stdin.write(request)  # type: ignore[union-attr]
                proc.stdin.flush()  # type: ignore[union-attr]
            except (BrokenPipeError, OSError) as exc:
                self._proc = None
                return "", f"solver adapter died: {exc}", False
            if not done.wait(deadline_s):
                proc.kill()
                self._proc = None
                return "", "", True
            return reply.get("out", ""), reply.get("err", ""), False


_session = _AdapterSession()
atexit.register(_session.kill)


def shutdown_sessions() -> None:
    """Kill the persistent adapter (it restarts lazily on the next query)."""
    _session.kill()


def _run_oneshot(command: Sequence[str], script: str, deadline_s: float) -> tuple[str, str, bool]:
    env = dict(os.environ)
    node_path = _node_path()
    if command and command[0] == "node" and node_path:
        env["NODE_PATH"] = node_path
    try:
        proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            env=env,
        )
    except OSError as exc:
        raise SolverUnavailable(f"cannot spawn solver {command[0]!r}: {exc}") from exc
    try:
        out, err = proc.communicate(script, timeout=deadline_s)
        return out, err, False
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        return "", "", True


def run_script(script: str, config: SolverConfig) -> SmtVerdict:
    """Run a complete SMT-LIB2 script and classify the first verdict token."""
    started = time.monotonic()
    soft_s = config.timeout_ms / 1000.0
    try:
        if config.command is None:
            # Generous hard deadline; the in-script soft timeout does the real work.
            out, err, timed_out = _session.query(script, deadline_s=soft_s * 2 + 30.0)
        else:
            out, err, timed_out = _run_oneshot(config.command, script, deadline_s=soft_s)
    except SolverUnavailable as exc:
        wall = (time.monotonic() - started) * 1000.0
        return SmtVerdict(SatResult.ERROR, wall, diagnostic=str(exc))
    wall = (time.monotonic() - started) * 1000.0
    if timed_out:
        return SmtVerdict(SatResult.TIMEOUT, max(wall, config.timeout_ms), diagnostic="killed at timeout")
    verdict = _classify_output(out, err, wall, config.timeout_ms)
    if verdict.result is SatResult.TIMEOUT and config.command is None:
        # A query that burned its whole budget can leave the shared WASM
        # instance degraded; restart it so later queries start clean.
        _session.kill()
    return verdict


def check_sat(
    f: Formula,
    config: SolverConfig | None = None,
    decls: Iterable[Variable] | None = None,
) -> SmtVerdict:
    """Satisfiability of f with its free variables as constants."""
    config = config or SolverConfig.from_environment()
    decls = list(decls) if decls is not None else sorted(F.free_vars(f))
    script = emit_smtlib(f, decls, config)
    return run_script(script, config)


def check_validity(
    f: Formula,
    config: SolverConfig | None = None,
    decls: Iterable[Variable] | None = None,
) -> ValidityVerdict:
    """Validity of f, decided as unsatisfiability of its negation."""
    config = config or SolverConfig.from_environment()
    verdict = check_sat(F.Not(f), config, decls)
    mapping = {
        SatResult.UNSAT: Validity.VALID,
        SatResult.SAT: Validity.INVALID,
        SatResult.UNKNOWN: Validity.UNKNOWN,
        SatResult.TIMEOUT: Validity.TIMEOUT,
        SatResult.ERROR: Validity.ERROR,
    }
    return ValidityVerdict(mapping[verdict.result], verdict.wall_ms, verdict.diagnostic)
