import json

import numpy as np
import pytest

from src.tools.diagnostics_report import diagnose, flow_multimodality
from src.types import Dataset
from src.utils.flow_matching import FlowMatching

QUICK_FLOWS = {"flow": {"epochs": 5, "hidden": 8}}


class TestDiagnose:

    def test_kernel_and_effect_sections(self, csv_inputs, tmp_path):
        report_path = tmp_path / "report.json"

        report = diagnose(*csv_inputs, report=report_path, with_flow=False)

        assert (report["n"], report["d"]) == (500, 5)
        assert len(report["mmd"]["deltas"]) == 5
        assert "doseResponse" in report["ate"]
        assert "flow" not in report
        assert json.loads(report_path.read_text())["mmd"]["tauC"] == report["mmd"]["tauC"]

    def test_flow_section(self, csv_inputs):
        report = diagnose(*csv_inputs, config=QUICK_FLOWS)

        pairs = report["flow"]["pairs"]
        assert len(pairs) == 20
        entry = pairs["0,1"]
        assert entry["modes"] >= 1
        assert np.isfinite(entry["loss"])
        assert set(entry["gaussianFit"]) == {"mean", "std"}

    def test_flow_conditional_forces_training(self, csv_inputs):
        config = {**QUICK_FLOWS, "obs_conditional": "flow"}

        report = diagnose(*csv_inputs, config=config, with_flow=False)

        assert "flow" in report


class TestFlowMultimodality:

    def test_zero_field_is_unimodal(self, rng):
        data = Dataset(values=rng.normal(size=(200, 2)))
        flows = {(0, 1): FlowMatching.zero_model((0, 1))}

        result = flow_multimodality(data, flows, n_samples=1000)

        assert result["pairs"]["0,1"]["modes"] == 1
        assert result["multimodalPairs"] == []
        assert result["pairs"]["0,1"]["gaussianFit"]["std"] == pytest.approx(1.0, abs=0.1)
