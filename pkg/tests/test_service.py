"""HTTP session API: flows, conflicts, persistence, isolation, parity."""

import json

import pytest
from fastapi.testclient import TestClient

from regretkit.document import load_problem
from regretkit.regret import minimax_regret
from regretkit.service import SessionStore, create_app
from regretkit.simulate import GeneratorSpec, generate_problem


@pytest.fixture
def deployment(tmp_path):
    doc = generate_problem(GeneratorSpec(preset="trend-10x5", seed=4))
    problems = tmp_path / "problems"
    problems.mkdir()
    doc.save(problems / "demo.json")
    app = create_app(str(tmp_path))
    return TestClient(app), tmp_path


class TestSessionFlow:
    def test_create_answer_status(self, deployment):
        client, root = deployment
        resp = client.post(
            "/sessions",
            json={"problem_id": "demo", "strategy": "AB+LB", "max_queries": 4, "seed": 1},
        )
        assert resp.status_code == 200
        body = resp.json()
        sid = body["session_id"]
        prev = body["mmr"]
        for i in range(4):
            q = client.get(f"/sessions/{sid}/query").json()
            assert "query_id" in q
            assert q["rendered"]["kind"] in ("LB", "LC", "AB")
            assert q["rendered"]["text"]
            ans = client.post(
                f"/sessions/{sid}/answer",
                json={"query_id": q["query_id"], "answer": "yes" if i % 2 else "no"},
            )
            assert ans.status_code == 200
            cur = ans.json()["mmr"]
            assert cur <= prev + 1e-9
            prev = cur
        status = client.get(f"/sessions/{sid}").json()
        assert status["query_count"] == 4
        assert len(status["trace"]) == 5

    def test_repeated_get_returns_same_query(self, deployment):
        client, _ = deployment
        sid = client.post("/sessions", json={"problem_id": "demo"}).json()["session_id"]
        q1 = client.get(f"/sessions/{sid}/query").json()
        q2 = client.get(f"/sessions/{sid}/query").json()
        assert q1["query_id"] == q2["query_id"]
        assert q1["machine"] == q2["machine"]

    def test_stale_answer_conflict(self, deployment):
        client, _ = deployment
        sid = client.post("/sessions", json={"problem_id": "demo"}).json()["session_id"]
        q = client.get(f"/sessions/{sid}/query").json()
        ok = client.post(
            f"/sessions/{sid}/answer", json={"query_id": q["query_id"], "answer": "yes"}
        )
        assert ok.status_code == 200
        stale = client.post(
            f"/sessions/{sid}/answer", json={"query_id": q["query_id"], "answer": "no"}
        )
        assert stale.status_code == 409

    def test_unknown_session(self, deployment):
        client, _ = deployment
        assert client.get("/sessions/nosuch").status_code == 404

    def test_invalid_answer_value(self, deployment):
        client, _ = deployment
        sid = client.post("/sessions", json={"problem_id": "demo"}).json()["session_id"]
        q = client.get(f"/sessions/{sid}/query").json()
        bad = client.post(
            f"/sessions/{sid}/answer", json={"query_id": q["query_id"], "answer": "maybe"}
        )
        assert bad.status_code == 422

    def test_sessions_isolated(self, deployment):
        client, _ = deployment
        a = client.post("/sessions", json={"problem_id": "demo", "seed": 2}).json()["session_id"]
        b = client.post("/sessions", json={"problem_id": "demo", "seed": 2}).json()["session_id"]
        qa = client.get(f"/sessions/{a}/query").json()
        qb = client.get(f"/sessions/{b}/query").json()
        client.post(f"/sessions/{a}/answer", json={"query_id": qa["query_id"], "answer": "yes"})
        client.post(f"/sessions/{b}/answer", json={"query_id": qb["query_id"], "answer": "no"})
        sa = client.get(f"/sessions/{a}").json()
        sb = client.get(f"/sessions/{b}").json()
        assert sa["mmr"] != sb["mmr"]
        # compare against sequential single-session runs
        c = client.post("/sessions", json={"problem_id": "demo", "seed": 2}).json()["session_id"]
        qc = client.get(f"/sessions/{c}/query").json()
        done = client.post(
            f"/sessions/{c}/answer", json={"query_id": qc["query_id"], "answer": "yes"}
        ).json()
        assert done["mmr"] == pytest.approx(sa["mmr"], abs=1e-12)

    def test_inline_problem(self, deployment):
        client, root = deployment
        doc_obj = json.loads((root / "problems" / "demo.json").read_text())
        resp = client.post("/sessions", json={"problem": doc_obj, "strategy": "LB"})
        assert resp.status_code == 200

    def test_invalid_inline_problem(self, deployment):
        client, _ = deployment
        resp = client.post("/sessions", json={"problem": {"format": "nope"}})
        assert resp.status_code == 422


class TestPersistence:
    def test_replay_exact(self, deployment):
        client, root = deployment
        sid = client.post(
            "/sessions", json={"problem_id": "demo", "strategy": "AB+LB", "seed": 3}
        ).json()["session_id"]
        for i in range(3):
            q = client.get(f"/sessions/{sid}/query").json()
            client.post(
                f"/sessions/{sid}/answer",
                json={"query_id": q["query_id"], "answer": "yes" if i != 1 else "no"},
            )
        mmr = client.get(f"/sessions/{sid}").json()["mmr"]
        fresh = SessionStore(root)
        live = fresh.load(sid)
        assert live.session.current.value == pytest.approx(mmr, abs=1e-12)
        assert live.session.query_count == 3

    def test_any_prefix_replays(self, deployment, tmp_path):
        client, root = deployment
        sid = client.post("/sessions", json={"problem_id": "demo", "seed": 5}).json()["session_id"]
        for _ in range(2):
            q = client.get(f"/sessions/{sid}/query").json()
            client.post(
                f"/sessions/{sid}/answer", json={"query_id": q["query_id"], "answer": "yes"}
            )
        log = (root / "sessions" / f"{sid}.jsonl").read_text().splitlines()
        for cut in range(1, len(log) + 1):
            stage = tmp_path / f"cut{cut}"
            (stage / "sessions").mkdir(parents=True)
            (stage / "sessions" / f"{sid}.jsonl").write_text("\n".join(log[:cut]) + "\n")
            live = SessionStore(stage).load(sid)
            assert live.session.current.value >= 0

    def test_torn_final_line_ignored(self, deployment, tmp_path):
        client, root = deployment
        sid = client.post("/sessions", json={"problem_id": "demo", "seed": 6}).json()["session_id"]
        q = client.get(f"/sessions/{sid}/query").json()
        client.post(f"/sessions/{sid}/answer", json={"query_id": q["query_id"], "answer": "yes"})
        text = (root / "sessions" / f"{sid}.jsonl").read_text()
        stage = tmp_path / "torn"
        (stage / "sessions").mkdir(parents=True)
        (stage / "sessions" / f"{sid}.jsonl").write_text(text + '{"event": "answ')
        live = SessionStore(stage).load(sid)
        assert live.session.query_count == 1

    def test_replay_preserves_random_stream(self, deployment):
        """After answers that consumed random-fallback draws (LC strategy),
        a reloaded session is on the identical random stream position and
        proposes the same next query as the original."""
        import numpy as np

        client, root = deployment
        sid = client.post(
            "/sessions", json={"problem_id": "demo", "strategy": "LC", "seed": 11,
                               "max_queries": 30},
        ).json()["session_id"]
        for i in range(12):
            q = client.get(f"/sessions/{sid}/query").json()
            if "query_id" not in q:
                break
            client.post(
                f"/sessions/{sid}/answer",
                json={"query_id": q["query_id"], "answer": "yes" if i % 2 else "no"},
            )
        live = client.app.state.store.load(sid)
        fresh = SessionStore(root).load(sid)
        pristine = np.random.default_rng(11).bit_generator.state
        assert live.session.rng.bit_generator.state != pristine  # draws happened
        assert live.session.rng.bit_generator.state == fresh.session.rng.bit_generator.state
        assert live.session.select_query() == fresh.session.select_query()

    def test_export_lists_events(self, deployment):
        client, _ = deployment
        sid = client.post("/sessions", json={"problem_id": "demo"}).json()["session_id"]
        events = client.get(f"/sessions/{sid}/export").json()["events"]
        assert events[0]["event"] == "created"
        assert any(e["event"] == "recommendation" for e in events)

    def test_list_sessions(self, deployment):
        client, _ = deployment
        client.post("/sessions", json={"problem_id": "demo"})
        client.post("/sessions", json={"problem_id": "demo"})
        listing = client.get("/sessions").json()
        assert len(listing) >= 2


class TestParity:
    def test_solve_matches_api_initial_mmr(self, deployment):
        client, root = deployment
        doc = load_problem(root / "problems" / "demo.json")
        expected = minimax_regret(doc.initial_space(), doc.feasibility).value
        got = client.post("/sessions", json={"problem_id": "demo"}).json()["mmr"]
        assert got == pytest.approx(expected, abs=1e-12)
