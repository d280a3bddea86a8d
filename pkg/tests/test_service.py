"""HTTP service tests through the ASGI test client."""

import json

import pytest
from fastapi.testclient import TestClient

from clawkit.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestEndpoints:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"

    def test_classify(self, client):
        resp = client.post("/classify", json={"equation": {"f": "1", "g": "u*p1"}})
        assert resp.status_code == 200
        data = resp.json()
        assert data["k_vanishes"] is True
        assert data["n_vanishes"] is True
        assert data["normal_form_detected"] == "u_xxx + g(x,u,p)"

    def test_classify_with_params(self, client):
        resp = client.post("/classify", json={
            "equation": {"f": "1", "g": "r1*u*p1", "params": {"r1": "2"}}})
        assert resp.status_code == 200

    def test_bad_equation_422(self, client):
        resp = client.post("/classify", json={"equation": {"f": "0", "g": "u"}})
        assert resp.status_code == 422
        resp = client.post("/classify", json={"equation": {"f": "1", "g": "w*p1"}})
        assert resp.status_code == 422

    def test_search(self, client):
        resp = client.post("/search", json={
            "equation": {"g": "u*p1"}, "m": 0,
            "ansatz": {"d_x": 1, "d_t": 1, "d_u": 2}})
        assert resp.status_code == 200
        data = resp.json()
        assert {law["rho"] for law in data["laws"]} >= {"u", "u^2"}
        assert all(law["weight"] == 2 * law["order"] - 1 for law in data["laws"])

    def test_type(self, client):
        resp = client.post("/type", json={"equation": {"g": "u*p1"}})
        assert resp.status_code == 200
        assert resp.json()["type"] == [3, 1, 1]

    def test_probe(self, client):
        resp = client.post("/probe", json={"equation": {"g": "p2^2"},
                                           "max_order": 0})
        assert resp.status_code == 200
        assert resp.json()["counts"] == [[0, 0]]

    def test_catalog_listing(self, client):
        resp = client.get("/catalog")
        assert resp.status_code == 200
        ids = {entry["id"] for entry in resp.json()}
        assert "kdv/classical" in ids

    def test_catalog_run_subset(self, client):
        resp = client.post("/catalog/run", json={"only": ["negative"]})
        assert resp.status_code == 200
        assert resp.json()["passed"] is True

    def test_verify(self, client):
        resp = client.post("/verify", json={
            "equation": {"g": "u*p1"}, "u0": "0", "L": 10.0, "N": 64,
            "dt": 1e-4, "T": 0.01, "densities": ["u", "u^2"]})
        assert resp.status_code == 200
        data = resp.json()
        assert data["passed"] is True
        assert len(data["values"]) == 2

    def test_verify_rejects_bad_profile(self, client):
        resp = client.post("/verify", json={
            "equation": {"g": "u*p1"}, "u0": "u + x", "T": 0.01, "N": 64,
            "dt": 1e-4, "L": 10.0})
        assert resp.status_code == 422

    def test_curveflow(self, client):
        resp = client.post("/curveflow", json={
            "x": "cos(theta)", "y": "sin(theta)", "N": 64, "T": 0.01,
            "filter_modes": 10, "fit_self_similar": True})
        assert resp.status_code == 200
        data = resp.json()
        assert data["self_similar_fit"]["residual"] < 1e-8
        assert data["moment_drifts"][0] < 1e-8

    def test_curveflow_samples(self, client):
        import numpy as np
        th = 2 * np.pi * np.arange(32) / 32
        samples = [[float(np.cos(a)), float(np.sin(a))] for a in th]
        resp = client.post("/curveflow", json={
            "samples": samples, "T": 0.001, "dt": 1e-4, "filter_modes": 6})
        assert resp.status_code == 200
        assert resp.json()["N"] == 32

    def test_curveflow_requires_curve(self, client):
        resp = client.post("/curveflow", json={"T": 0.01})
        assert resp.status_code == 422

    def test_selfsimilar(self, client):
        resp = client.post("/selfsimilar", json={
            "x": "2*cos(theta)", "y": "2*sin(theta)", "N": 64,
            "a0": -0.015625})
        assert resp.status_code == 200
        assert resp.json()["residual"] < 1e-8

    def test_deterministic_output(self, client):
        payload = {"equation": {"g": "u*p1"}, "m": 0,
                   "ansatz": {"d_x": 1, "d_t": 1, "d_u": 2}}
        first = client.post("/search", json=payload).content
        second = client.post("/search", json=payload).content
        assert first == second
