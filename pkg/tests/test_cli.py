import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from exactcap.channel_io import format_channel, parse_channel, write_channel
from exactcap.cli import SCAN_COLUMNS, main, scan_csv
from exactcap.errors import ChannelFileError
from exactcap.family import epsilon_family_channel, piecewise_capacity, thresholds
from exactcap.prob import LOG2, ClassicalChannel, binary_entropy, bsc
from exactcap.quantum import CqChannel, bloch_state


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestChannelFiles:
    @settings(max_examples=30)
    @given(arrays(float, (3, 4), elements=st.floats(0.01, 1.0)))
    def test_classical_round_trip(self, raw):
        ch = ClassicalChannel(raw / raw.sum(axis=1, keepdims=True))
        text = format_channel(ch, "bits")
        parsed = parse_channel(text)
        np.testing.assert_array_equal(parsed.channel.matrix, ch.matrix)
        assert parsed.units == "bits"
        assert format_channel(parsed) == text

    def test_cq_round_trip(self):
        cq = CqChannel((bloch_state([0.3, -0.2, 0.1]), bloch_state([0, 0.5, 0])))
        text = format_channel(cq)
        parsed = parse_channel(text)
        assert parsed.kind == "cq"
        for a, b in zip(parsed.channel.states, cq.states):
            np.testing.assert_array_equal(a, b)
        assert format_channel(parsed) == text

    def test_bad_row_reports_position(self):
        text = "exactcap-channel 1\n{\n  \"rows\": [\n    [0.5, 0.5],\n    [0.5, 0.4]\n  ]\n}\n"
        with pytest.raises(ChannelFileError) as info:
            parse_channel(text)
        assert info.value.line == 5
        assert info.value.column == 5
        assert "line 5" in str(info.value)

    def test_ragged_rows(self):
        text = "exactcap-channel 1\n{\"rows\": [[1.0], [0.5, 0.5]]}\n"
        with pytest.raises(ChannelFileError) as info:
            parse_channel(text)
        assert info.value.line == 2

    @pytest.mark.parametrize("text", [
        "not a header\n{}",
        "exactcap-channel 1\n{\"rows\": [[1.0]],}",
        "exactcap-channel 1\n[1, 2]",
        "exactcap-channel 1\n{\"kind\": \"mystery\", \"rows\": [[1.0]]}",
        "exactcap-channel 1\n{\"rows\": [[1.0]], \"units\": \"bans\"}",
    ])
    def test_malformed(self, text):
        with pytest.raises(ChannelFileError):
            parse_channel(text)


class TestCapacityCommand:
    def test_bsc_bits(self, tmp_path, capsys):
        f = tmp_path / "bsc.txt"
        write_channel(f, bsc(0.1))
        code, out, _ = run(["capacity", f, "--units", "bits"], capsys)
        assert code == 0
        assert "capacity: 0.531004" in out
        expected = (LOG2 - binary_entropy(0.1)) / LOG2
        assert float(out.split()[1]) == pytest.approx(expected, abs=1e-11)

    def test_family_json(self, tmp_path, capsys):
        f = tmp_path / "fam.txt"
        run(["family", 0.2, "--out", f], capsys)
        code, out, _ = run(["capacity", f, "--format", "json", "--oracle", "on"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["support"] == [1, 2]
        assert doc["capacity_nats"] == pytest.approx(0.8 * LOG2, abs=1e-12)
        assert doc["oracle_delta"] <= 1e-9
        assert doc["path"]["route"] == "subset-search"

    def test_text_path_uses_labels(self, tmp_path, capsys):
        f = tmp_path / "fam.txt"
        write_channel(f, epsilon_family_channel(0.45))
        _, out, _ = run(["capacity", f], capsys)
        assert "dropped inputs [1]" in out
        assert "support: [3, 4]" in out

    def test_bad_row_exit_code(self, tmp_path, capsys):
        f = tmp_path / "bad.txt"
        f.write_text("exactcap-channel 1\n{\n  \"rows\": [\n    [0.5, 0.4]\n  ]\n}\n")
        code, _, err = run(["capacity", f], capsys)
        assert code == 2
        assert "line 4" in err

    def test_singular_exit_code(self, tmp_path, capsys):
        f = tmp_path / "dup.txt"
        write_channel(f, [[0.3, 0.7, 0.0], [0.3, 0.7, 0.0]])
        code, _, err = run(["capacity", f], capsys)
        assert code == 3
        assert "SingularChannel" in err

    def test_inconclusive_exit_code(self, tmp_path, capsys):
        f = tmp_path / "fam.txt"
        write_channel(f, epsilon_family_channel(0.2))
        code, _, err = run(["capacity", f, "--tol-eq", "-1"], capsys)
        assert code == 4
        assert "Blahut-Arimoto" in err

    def test_wrong_kind(self, tmp_path, capsys):
        f = tmp_path / "cq.txt"
        write_channel(f, CqChannel.from_classical([[0.9, 0.1], [0.2, 0.8]]))
        code, _, _ = run(["capacity", f], capsys)
        assert code == 2

    def test_manifest(self, tmp_path, capsys):
        f = tmp_path / "bsc.txt"
        write_channel(f, bsc(0.1))
        man = tmp_path / "run.json"
        run(["capacity", f, "--manifest", man], capsys)
        doc = json.loads(man.read_text())
        assert doc["command"] == "capacity"
        assert len(doc["input_digest"]) == 64
        assert doc["results"]["capacity_nats"] == pytest.approx(LOG2 - binary_entropy(0.1))


class TestCqCommand:
    def test_commuting_matches_classical(self, tmp_path, capsys):
        rows = [[0.9, 0.1], [0.6, 0.4], [0.3, 0.7], [0.05, 0.95]]
        fc, fq = tmp_path / "c.txt", tmp_path / "q.txt"
        write_channel(fc, rows)
        write_channel(fq, CqChannel.from_classical(rows))
        _, out_c, _ = run(["capacity", fc, "--format", "json"], capsys)
        code, out_q, _ = run(["cq-capacity", fq, "--format", "json"], capsys)
        assert code == 0
        assert json.loads(out_q)["capacity"] == pytest.approx(json.loads(out_c)["capacity"], abs=1e-8)

    def test_pure_state_exit_code(self, tmp_path, capsys):
        f = tmp_path / "pure.txt"
        states = [bloch_state([0.5, 0, 0]), bloch_state([0, 0.5, 0]),
                  bloch_state([0, 0, 0.5]), bloch_state([0, 0, 1])]
        write_channel(f, CqChannel(tuple(states)))
        code, _, err = run(["cq-capacity", f], capsys)
        assert code == 5
        assert "state 3" in err

    def test_qubit_file_reports_gate(self, tmp_path, capsys):
        f = tmp_path / "tetra.txt"
        states = [bloch_state([0.5, 0, 0]), bloch_state([0, 0.5, 0]),
                  bloch_state([0, 0, 0.5]), np.eye(2) / 2]
        write_channel(f, CqChannel(tuple(states)))
        code, out, _ = run(["cq-capacity", f, "--format", "json"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["gate"] == "gate-failed"
        assert doc["route"] == "oracle-fallback"
        assert doc["negative_inputs"] == [3]


class TestScan:
    def test_two_steps(self, capsys):
        code, out, _ = run(["scan-epsilon", "--steps", 2], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0].split(",") == SCAN_COLUMNS
        rows = [ln for ln in lines[1:] if not ln.startswith("#")]
        assert len(rows) == 2

    def test_footer_thresholds(self, capsys):
        _, out, _ = run(["scan-epsilon", "--steps", 3], capsys)
        footer = dict(ln[2:].split("=") for ln in out.splitlines() if ln.startswith("#"))
        assert float(footer["threshold_g1"]) == pytest.approx(0.3588, abs=5e-4)
        assert float(footer["threshold_qhat"]) == pytest.approx(0.3972, abs=5e-4)
        assert float(footer["threshold_g2"]) == pytest.approx(0.4286, abs=5e-4)

    def test_deterministic(self):
        assert scan_csv(0.05, 0.45, 7) == scan_csv(0.05, 0.45, 7)

    def test_capacity_column(self):
        text = scan_csv(0.01, 0.49, 10)
        reader = csv.DictReader(ln for ln in io.StringIO(text) if not ln.startswith("#"))
        for row in reader:
            eps = float(row["epsilon"])
            assert float(row["capacity"]) == pytest.approx(piecewise_capacity(eps), abs=1e-8)

    @pytest.mark.parametrize("argv", [["--steps", "1"], ["--start", "0.6"]])
    def test_bad_range(self, argv, capsys):
        code, _, _ = run(["scan-epsilon", *argv], capsys)
        assert code == 2


class TestBench:
    def test_empty_sizes(self, capsys):
        code, out, _ = run(["bench", "--sizes", ""], capsys)
        assert code == 0
        assert out.strip() == "n,trials,gate_valid,exact_median_s,ba_median_s,max_abs_delta"

    def test_agreement(self, capsys):
        code, out, _ = run(["bench", "--sizes", "2,8", "--trials", 5], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 2
        for row in rows:
            if int(row["gate_valid"]):
                assert float(row["max_abs_delta"]) <= 1e-8


def test_module_entry_point(tmp_path):
    f = tmp_path / "bsc.txt"
    write_channel(f, bsc(0.25))
    res = subprocess.run([sys.executable, "-m", "exactcap.cli", "capacity", str(f)],
                         capture_output=True, text=True, check=True)
    assert float(res.stdout.split()[1]) == pytest.approx(LOG2 - binary_entropy(0.25), abs=1e-11)
