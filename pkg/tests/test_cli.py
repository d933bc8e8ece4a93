import pytest

from conftest import SYSTEMS
from f4ms import main


def system(name):
    return str(SYSTEMS / f"{name}.f4ms")


def test_validate_is_silent_on_success(capsys):
    assert main(["validate", system("drms_business_model")]) == 0
    out, err = capsys.readouterr()
    assert (out, err) == ("", "")


def test_validate_verbose(capsys):
    assert main(["-v", "validate", system("chain")]) == 0
    assert capsys.readouterr().err.startswith("[*] ")


def test_validate_reports_diagnostics(tmp_path, capsys):
    text = (SYSTEMS / "drms_business_model.f4ms").read_text(encoding="utf-8")
    bad = tmp_path / "bad.f4ms"
    bad.write_text(text.replace('{name: "key", tag: "session_key"}', '{name: "key", tag: "license"}', 1),
                   encoding="utf-8")
    assert main(["validate", str(bad)]) == 1
    out, err = capsys.readouterr()
    assert out == ""
    lines = err.splitlines()
    assert len(lines) == 1
    assert lines[0].startswith(f"{bad}:")
    assert "ValidationError: TagMismatch" in lines[0]


def test_validate_missing_file(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.f4ms")]) == 1
    assert "IOError" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main([]) == 2
    assert "usage:" in capsys.readouterr().err
    assert main(["run"]) == 2
    assert main(["run", system("chain"), "--format", "xml"]) == 2


def test_run_writes_reproducible_trace(tmp_path, capsys):
    first, second = tmp_path / "a.trace", tmp_path / "b.trace"
    assert main(["run", system("drms_business_model"), "--seed", "1", "--trace", str(first)]) == 0
    assert capsys.readouterr().out == "sim_time=29.000000\n"
    assert main(["run", system("drms_business_model"), "--seed", "1", "--trace", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()

    lines = first.read_text(encoding="utf-8").splitlines()
    protocol = [line for line in lines if "\tMessageTransfer\t" in line and any(
        f'tag: "{tag}"' in line for tag in
        ("content_request", "info_demand", "user_info", "license_request", "license", "authorization"))]
    assert len(protocol) == 6


def test_run_structured_trace(tmp_path, capsys):
    path = tmp_path / "fork_join.f4ms"
    assert main(["run", system("fork_join"), "--trace", str(path), "--format", "structured"]) == 0
    assert "sim_time: 7" in path.read_text(encoding="utf-8")


def test_run_mappings(tmp_path, capsys):
    assert main(["run", system("fork_join"), "--mapping", "all-hw-where-allowed"]) == 0
    assert capsys.readouterr().out == "sim_time=3.500000\n"

    mapping = tmp_path / "mapping.f4ms"
    mapping.write_text('{a: "SW", b: "HW", c: "HW", d: "SW"}\n', encoding="utf-8")
    assert main(["run", system("fork_join"), "--mapping", str(mapping)]) == 0
    assert capsys.readouterr().out == "sim_time=4.000000\n"

    mapping.write_text('{a: "SW", b: "SW", c: "SW", d: "HW"}\n', encoding="utf-8")
    assert main(["run", system("fork_join"), "--mapping", str(mapping)]) == 3
    assert capsys.readouterr().err.startswith("[!] KindNotAllowed: ")

    assert main(["run", system("fork_join"), "--mapping", str(tmp_path / "missing.f4ms")]) == 2


def test_run_step_limit(capsys):
    assert main(["run", system("retry_loop")]) == 3
    assert "[!] StepLimitExceeded: 10000 firings" in capsys.readouterr().err


def test_partition_drms(tmp_path, capsys):
    report = tmp_path / "report.f4ms"
    code = main(["partition", system("drms_business_model"), "--weights", "1,1,1,10",
                 "--area-budget", "20", "--report", str(report)])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "objective=18.000000"
    assert "content_enc=HW" in lines and "license_enc=HW" in lines and "keygen=SW" in lines
    assert len(lines) == 11
    text = report.read_text(encoding="utf-8")
    assert "best:" in text and "evaluated: 32" in text


def test_partition_hardware_only(capsys):
    assert main(["partition", system("hw_only")]) == 0
    out = capsys.readouterr().out
    assert "accel=HW" in out and "objective=" in out

    assert main(["partition", system("hw_only"), "--area-budget", "0"]) == 3
    assert "NoFeasibleMapping" in capsys.readouterr().err


@pytest.mark.parametrize("flags", [
    ["--weights", "0,0,0,0"],
    ["--weights", "1,1"],
    ["--refs", "1,1,0,1"],
    ["--area-budget", "lots"],
    ["--security-floor", "9"],
])
def test_partition_bad_flags(flags, capsys):
    assert main(["partition", system("chain")] + flags) == 2
    assert capsys.readouterr().err.startswith("f4ms: error: ")


def test_demo_issue(capsys):
    assert main(["demo-drm"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1] == "result=ok"
    assert out.count("\nstep ") == 6


def test_demo_expired(capsys):
    assert main(["demo-drm", "--scenario", "consume", "--now", "150"]) == 3
    out, err = capsys.readouterr()
    assert out.splitlines()[-1] == "result=denied:Expired"
    assert err.startswith("[!] Expired: ")


def test_demo_renew(capsys):
    assert main(["demo-drm", "--scenario", "renew", "--now", "150"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "result=ok"


def test_log_dir(tmp_path, capsys):
    logs = tmp_path / "logs"
    assert main(["--log-dir", str(logs), "validate", system("chain")]) == 0
    (log_file,) = logs.glob("f4ms_validate_*.log")
    assert "3 component(s)" in log_file.read_text(encoding="utf-8")
