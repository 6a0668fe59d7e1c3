"""
Line-protocol environment bridge for external learning agents.

One JSON object per line, request/reply, every request answered exactly
once with the request's sequence number echoed.  A session wraps one
:class:`~airdelay.sim.StepSession`: an episode is one scheduling period,
a step is one synchronized frame window.  See docs/bridge-protocol.md for
the field-by-field message reference.

Requests:
    {"seq", "type": "hello", "scenario": <path, optional if preloaded>}
    {"seq", "type": "reset", "seed": <int>}
    {"seq", "type": "step", "action": {"assignment": [[subchannel, user], ...],
                                        "tti_index": <int>}}
    {"seq", "type": "close"}

Error replies carry a stable code (MALFORMED, UNKNOWN_TYPE, NO_SCENARIO,
NO_SESSION, EXCLUSIVITY, BOUNDS, DONE) and never tear the session down.
"""

from __future__ import annotations

import json
import socketserver
import sys

from .optimize import DEFAULT_TTI_LEVELS_S
from .scenario import Scenario, load_scenario
from .sim import StepSession


def observation_layout(users: int, subchannels: int) -> list[str]:
    layout = [f"queue_bits:{u}" for u in range(users)]
    layout += [f"hol_wait_s:{u}" for u in range(users)]
    layout += [
        f"gain_db:{u}:{s}" for u in range(users) for s in range(subchannels)
    ]
    layout += ["remaining_period_s", "step_index"]
    return layout


class BridgeSession:
    """One protocol session; processes requests strictly in order."""

    def __init__(
        self,
        scenario: Scenario | None = None,
        tti_levels_s=DEFAULT_TTI_LEVELS_S,
        drop_penalty_s: float | None = None,
    ):
        self.scenario = scenario
        self.levels = tuple(tti_levels_s)
        self.drop_penalty_s = drop_penalty_s
        self.session: StepSession | None = None

    # -- message handling --------------------------------------------------

    def handle_line(self, line: str) -> str:
        try:
            reply = self._dispatch(line)
        except _ProtocolError as e:
            reply = {"seq": e.seq, "type": "error", "code": e.code,
                     "message": e.message}
        return json.dumps(reply)

    def _dispatch(self, line: str) -> dict:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as e:
            raise _ProtocolError(None, "MALFORMED", f"bad JSON: {e}") from e
        if not isinstance(msg, dict):
            raise _ProtocolError(None, "MALFORMED", "message must be an object")
        seq = msg.get("seq")
        mtype = msg.get("type")
        if mtype == "hello":
            return self._hello(seq, msg)
        if mtype == "reset":
            return self._reset(seq, msg)
        if mtype == "step":
            return self._step(seq, msg)
        if mtype == "close":
            return {"seq": seq, "type": "bye"}
        raise _ProtocolError(seq, "UNKNOWN_TYPE", f"unknown type {mtype!r}")

    def _hello(self, seq, msg) -> dict:
        path = msg.get("scenario")
        if path:
            try:
                self.scenario = load_scenario(path)
            except (OSError, ValueError) as e:
                raise _ProtocolError(seq, "NO_SCENARIO", str(e)) from e
        if self.scenario is None:
            raise _ProtocolError(
                seq, "NO_SCENARIO", "no scenario preloaded and none supplied"
            )
        sc = self.scenario
        users = 1 if sc.noma else sc.users
        return {
            "seq": seq,
            "type": "spec",
            "users": users,
            "subchannels": sc.subchannels,
            "packet_bits": sc.packet_bits,
            "period_s": sc.period_s,
            "protocol": sc.protocol.value,
            "tti_levels_s": list(self.levels),
            "assignment_space": users**sc.subchannels,
            "tti_space": len(self.levels),
            "drop_penalty_s": (
                sc.period_s if self.drop_penalty_s is None else self.drop_penalty_s
            ),
            "observation_layout": observation_layout(users, sc.subchannels),
        }

    def _reset(self, seq, msg) -> dict:
        if self.scenario is None:
            raise _ProtocolError(seq, "NO_SCENARIO", "hello with a scenario first")
        seed = msg.get("seed")
        if not isinstance(seed, int):
            raise _ProtocolError(seq, "MALFORMED", "reset needs an integer seed")
        self.session = StepSession(self.scenario, self.levels, self.drop_penalty_s)
        obs = self.session.reset(seed)
        return {"seq": seq, "type": "observation", "observation": obs}

    def _step(self, seq, msg) -> dict:
        if self.session is None:
            raise _ProtocolError(seq, "NO_SESSION", "reset before stepping")
        if self.session.done:
            raise _ProtocolError(seq, "DONE", "episode is done; reset to continue")
        action = msg.get("action")
        if not isinstance(action, dict):
            raise _ProtocolError(seq, "MALFORMED", "step needs an action object")
        assignment = self._parse_assignment(seq, action.get("assignment"))
        tti_index = action.get("tti_index")
        if not isinstance(tti_index, int) or not (0 <= tti_index < len(self.levels)):
            raise _ProtocolError(
                seq, "BOUNDS", f"tti_index must be an int in [0, {len(self.levels)})"
            )
        res = self.session.step(assignment, tti_index)
        return {
            "seq": seq,
            "type": "step_result",
            "observation": res.observation,
            "reward": res.reward,
            "done": res.done,
            "info": {
                "time_s": res.time_s,
                "completed": len(res.completed),
                "dropped": sum(1 for r in res.completed if r.dropped),
                "step_index": self.session.step_index,
            },
        }

    def _parse_assignment(self, seq, pairs) -> tuple[int, ...]:
        sc = self.scenario
        users = 1 if sc.noma else sc.users
        if not isinstance(pairs, list):
            raise _ProtocolError(
                seq, "MALFORMED", "assignment must be a list of [subchannel, user]"
            )
        out: dict[int, int] = {}
        for item in pairs:
            if (
                not isinstance(item, list)
                or len(item) != 2
                or not all(isinstance(x, int) for x in item)
            ):
                raise _ProtocolError(
                    seq, "MALFORMED", "assignment entries are [subchannel, user]"
                )
            s, u = item
            if not (0 <= s < sc.subchannels) or not (0 <= u < users):
                raise _ProtocolError(seq, "BOUNDS",
                                     f"assignment entry [{s}, {u}] out of range")
            if s in out:
                raise _ProtocolError(
                    seq, "EXCLUSIVITY",
                    f"subchannel {s} assigned more than once",
                )
            out[s] = u
        if len(out) != sc.subchannels:
            missing = sorted(set(range(sc.subchannels)) - set(out))
            raise _ProtocolError(
                seq, "MALFORMED", f"subchannels {missing} missing from assignment"
            )
        return tuple(out[s] for s in range(sc.subchannels))


class _ProtocolError(Exception):
    def __init__(self, seq, code: str, message: str):
        self.seq = seq
        self.code = code
        self.message = message
        super().__init__(f"{code}: {message}")


# ---------------------------------------------------------------------------
# endpoints
# ---------------------------------------------------------------------------

def serve_stdio(scenario=None, tti_levels_s=DEFAULT_TTI_LEVELS_S,
                drop_penalty_s=None, *, stdin=None, stdout=None) -> None:
    """Serve one session over standard input/output."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = BridgeSession(scenario, tti_levels_s, drop_penalty_s)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(session.handle_line(line) + "\n")
        stdout.flush()


def serve_tcp(host: str, port: int, scenario=None,
              tti_levels_s=DEFAULT_TTI_LEVELS_S, drop_penalty_s=None,
              *, ready_callback=None):
    """Serve sessions over TCP; one independent session per connection."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            session = BridgeSession(scenario, tti_levels_s, drop_penalty_s)
            for raw in self.rfile:
                line = raw.decode("utf-8").strip()
                if not line:
                    continue
                self.wfile.write((session.handle_line(line) + "\n").encode("utf-8"))

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    server = Server((host, port), Handler)
    if ready_callback is not None:
        ready_callback(server.server_address)
    try:
        server.serve_forever()
    finally:
        server.server_close()
