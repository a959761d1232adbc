"""
Tests for the inobody command line
"""

import json
import os
import sys

import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "../.."))

from inobody.cli import main


@pytest.fixture
def forms_file(tmp_path):
    path = tmp_path / "forms.txt"
    path.write_text("variables: 3\nx1**2\nx1*x2\n", encoding="utf-8")
    return path


@pytest.mark.integration
class TestBodyCommand:
    """Test `inobody body`"""

    def test_json_output(self, capsys):
        """A family body prints as JSON and exits 0"""
        assert main(["body", "product-curves", "--n", "3", "--quiet"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["epsilons"] == ["1/1", "2/1", "3/1"]
        assert data["vol"] == "6/1"

    def test_svg_to_file(self, tmp_path):
        """--format svg with --out writes a drawing"""
        out = tmp_path / "body.svg"
        assert main(["body", "blowup-p2", "--format", "svg", "--out", str(out), "--quiet"]) == 0
        assert "<polygon" in out.read_text(encoding="utf-8")

    def test_very_general_on_special_point(self, capsys):
        """Forced very-general checks fail only expectedly"""
        assert main(["body", "blowup-p2", "--very-general", "--quiet"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["verdicts"]["borel"] is False

    def test_bad_parameter(self):
        """aH - E needs a > 1"""
        assert main(["body", "blowup-pn", "--a", "1", "--quiet"]) == 2

    def test_unknown_family(self):
        """Unknown families are input errors"""
        assert main(["body", "no-such-family", "--quiet"]) == 2


@pytest.mark.integration
class TestValsetCommand:
    """Test `inobody valset`"""

    def test_deterministic(self, forms_file, capsys):
        """Same seed, same output"""
        assert main(["valset", str(forms_file), "--seed", "5", "--quiet"]) == 0
        first = capsys.readouterr().out
        assert main(["valset", str(forms_file), "--seed", "5", "--quiet"]) == 0
        assert capsys.readouterr().out == first
        data = json.loads(first)
        assert data["rank"] == 2

    def test_empty_file(self, tmp_path):
        """A file without generators exits 2"""
        path = tmp_path / "empty.txt"
        path.write_text("# nothing\n", encoding="utf-8")
        assert main(["valset", str(path), "--quiet"]) == 2

    def test_missing_file(self, tmp_path):
        """Unreadable files exit 2"""
        assert main(["valset", str(tmp_path / "missing.txt"), "--quiet"]) == 2


@pytest.mark.integration
class TestZariskiCommand:
    """Test `inobody zariski`"""

    def test_decompose_at_t(self, capsys):
        """t = 2 on the default blow-up has negative part F/2"""
        assert main(["zariski", "--t", "2", "--quiet"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["support"] == ["F"]
        assert data["negative"] == {"F": "1/2"}

    def test_profile(self, capsys):
        """--profile prints the breakpoints"""
        assert main(["zariski", "--profile", "--quiet"]) == 0
        assert json.loads(capsys.readouterr().out)["breakpoints"] == ["1/1", "3/1", "7/1"]

    def test_picard_one(self, capsys):
        """H.H = 4 has mu = 2"""
        assert main(["zariski", "--family", "picard-one", "--h", "4", "--profile", "--quiet"]) == 0
        assert json.loads(capsys.readouterr().out)["mu"] == "2/1"

    def test_beyond_mu(self):
        """No decomposition past mu is a verdict failure"""
        assert main(["zariski", "--t", "8", "--quiet"]) == 1

    def test_asymmetric_model_file(self, tmp_path):
        """A non-symmetric Gram matrix exits 2"""
        path = tmp_path / "model.json"
        model = {"classes": ["C", "E"], "gram": [["-1/1", "1/1"], ["0/1", "-1/1"]], "pullback": ["1/1", "0/1"]}
        path.write_text(json.dumps(model), encoding="utf-8")
        assert main(["zariski", str(path), "--t", "0", "--quiet"]) == 2

    def test_mode_required(self):
        """One of --t and --profile is required"""
        with pytest.raises(SystemExit) as exc:
            main(["zariski"])
        assert exc.value.code == 2


@pytest.mark.integration
class TestVerifyCommand:
    """Test `inobody verify`"""

    def test_bodies_suite(self, capsys):
        """The bodies battery passes"""
        assert main(["verify", "--suite", "bodies", "--quiet"]) == 0
        assert json.loads(capsys.readouterr().out)["passed"] is True

    def test_corrupted_fixtures(self, tmp_path):
        """A wrong fixture exits 1"""
        path = tmp_path / "fixtures.json"
        path.write_text('{"jacobian-nonhyper": {"vol": "7/1"}}', encoding="utf-8")
        assert main(["verify", "--suite", "bodies", "--fixtures", str(path), "--quiet"]) == 1

    def test_unknown_suite(self):
        """Unknown suites exit 2"""
        assert main(["verify", "--suite", "bogus", "--quiet"]) == 2

    def test_bad_seed_environment(self, monkeypatch):
        """A non-integer INOBODY_SEED exits 2"""
        monkeypatch.setenv("INOBODY_SEED", "abc")
        assert main(["verify", "--suite", "bodies"]) == 2

    def test_internal_error(self, monkeypatch, capsys):
        """An unexpected exception exits 1 and logs its traceback"""

        def broken(*args, **kwargs):
            raise RuntimeError("boom")

        monkeypatch.setattr("inobody.cli.run_suite", broken)
        assert main(["verify", "--suite", "bodies", "--quiet"]) == 1
        err = capsys.readouterr().err
        assert "Unhandled error occurred: boom" in err
        assert "Traceback" in err


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
