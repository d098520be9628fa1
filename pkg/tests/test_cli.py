import json

from hkworkbench.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compute_plane(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "compute", "--ring", "p=2;vars=x,y", "--ideal", "x,y", "--emax", "4", "-o", str(out))
    assert code == 0
    assert out.read_text() == "e,q,phi\n1,2,4\n2,4,16\n3,8,64\n4,16,256\n"
    details = (tmp_path / "s.degrees.csv").read_text().splitlines()
    assert details[0] == "e,q,m,dim" and details[1] == "1,2,0,1"


def test_compute_is_deterministic_and_cached(capsys, tmp_path):
    args = ["compute", "--ring", "p=3;vars=x,y,z;rel=y^2*z-x^3-x*z^2", "--ideal", "x,y,z", "--emax", "2"]
    cache = tmp_path / "c"
    code1, first, _ = run(capsys, *args, "--cache-dir", str(cache))
    assert code1 == 0 and any(p.is_file() for p in cache.rglob("*"))
    code2, second, _ = run(capsys, *args, "--cache-dir", str(cache))
    _, uncached, _ = run(capsys, *args, "--no-cache")
    assert first == second == uncached


def test_compute_fermat(capsys):
    code, out, _ = run(capsys, "compute", "--ring", "p=7;vars=x,y,z;rel=x^3+y^3+z^3", "--ideal", "x,y,z", "--emax", "2")
    assert code == 0 and out == "e,q,phi\n1,7,109\n2,49,5401\n"


def test_compute_parse_error(capsys):
    code, _, err = run(capsys, "compute", "--ring", "p=7;vars=x,y,z;rel=x^3+y^^3", "--ideal", "x")
    assert code == 2 and "column" in err


def test_compute_not_primary(capsys):
    code, _, err = run(capsys, "compute", "--ring", "p=3;vars=x,y", "--ideal", "x,x*y", "--emax", "1")
    assert code == 4 and "bound" in err


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "job.ini"
    cfg.write_text("[job]\nring = p=2;vars=x,y\nideal = x,y\nemax = 3\n")
    code, out, _ = run(capsys, "compute", "--config", str(cfg))
    assert code == 0 and out.count("\n") == 4
    code, out, _ = run(capsys, "compute", "--config", str(cfg), "--emax", "1")
    assert out == "e,q,phi\n1,2,4\n"
    cfg.write_text("[job]\nbogus = 1\n")
    code, _, _ = run(capsys, "compute", "--config", str(cfg))
    assert code == 2


def write_samples(path, rows):
    path.write_text("e,q,phi\n" + "".join(f"{e},{q},{phi}\n" for e, q, phi in rows))


def test_fit_examples(capsys, tmp_path):
    f = tmp_path / "sq.csv"
    write_samples(f, [(e, 2**e, 4**e) for e in range(1, 6)])
    code, out, _ = run(capsys, "fit", str(f))
    rep = json.loads(out)
    assert code == 0 and rep["e_hk"] == "1/1" and rep["tau"] == 1 and rep["gamma"] == ["0/1"]

    write_samples(f, [(e, 2**e, 3 * 4**e + e % 2) for e in range(1, 7)])
    code, out, _ = run(capsys, "fit", str(f))
    rep = json.loads(out)
    assert (rep["tau"], rep["e0"], rep["gamma"]) == (2, 1, ["1/1", "0/1"])

    write_samples(f, [(1, 2, 4), (2, 4, 16)])
    code, out, _ = run(capsys, "fit", str(f))
    assert code == 3 and json.loads(out)["error"] == "fit-failure"


def test_fit_gnuplot_and_plot(capsys, tmp_path):
    f = tmp_path / "s.csv"
    write_samples(f, [(e, 7**e, 9 * 49**e // 4 - 1) for e in range(1, 4)])
    png = tmp_path / "gamma.png"
    code, out, _ = run(capsys, "fit", str(f), "--gnuplot", "--plot", str(png))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# e_hk=9/4")
    assert lines[2:] == ["7 -5/4", "49 -5/4", "343 -5/4"]
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_fit_bad_csv(capsys, tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("e,phi\n1,2\n")
    code, _, _ = run(capsys, "fit", str(f))
    assert code == 2


def test_p1check(capsys):
    code, out, _ = run(capsys, "p1check", "--trials", "1000", "--seed", "42")
    assert code == 0 and out == "1000/1000 exact\n"
    _, again, _ = run(capsys, "p1check", "--trials", "1000", "--seed", "42")
    assert again == out
    code, out, _ = run(capsys, "p1check", "--trials", "1", "--seed", "42")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("case 0:") and lines[1] == "1/1 exact"
    code, out, _ = run(capsys, "p1check", "--trials", "50", "--seed", "1", "--sequences", "20")
    assert out.splitlines()[-1] == "20/20 sequences periodic"
    code, out, _ = run(capsys, "p1check", "--trials", "50", "--seed", "1", "--case", "17")
    assert out.startswith("case 17:")
    code, _, _ = run(capsys, "p1check", "--trials", "0")
    assert code == 2


def test_bundle_sections(capsys):
    code, out, _ = run(capsys, "bundle-sections", "--split", "0,-1", "--sigma=-1/2", "--rho", "2", "--p", "2", "--e", "3")
    rep = json.loads(out)
    assert code == 0 and rep["agree"] and rep["total"] == rep["direct"]
    code, out, _ = run(capsys, "bundle-sections", "--hn", "1:0", "--curve", "g=0,degY=1", "--sigma", "0", "--rho", "1", "--p", "3", "--e", "2")
    assert json.loads(out)["total"] == "45/1"
    code, _, err = run(capsys, "bundle-sections", "--hn", "1:0", "--curve", "g=0,degY=1", "--sigma", "1", "--rho", "3", "--p", "3", "--e", "1")
    assert code == 4 and "sigma" in err
    code, _, _ = run(capsys, "bundle-sections", "--hn", "1:0;2:1", "--curve", "g=0,degY=1", "--sigma", "0", "--rho", "3", "--p", "3", "--e", "1")
    assert code == 2


def test_bundle_sequence(capsys):
    code, out, _ = run(capsys, "bundle-sequence", "--S", "1:-2", "--T", "2:-1", "--Q", "1:0", "--curve", "g=0,degY=1")
    assert code == 0 and json.loads(out) == {"coefficient": "1/1"}
    code, _, _ = run(capsys, "bundle-sequence", "--S", "1:-2", "--T", "2:-1", "--Q", "1:1", "--curve", "g=0,degY=1")
    assert code == 4
    code, out, _ = run(capsys, "bundle-sequence", "--S", "1", "--T", "1,-1", "--Q", "-1", "--split", "--p", "5")
    rep = json.loads(out)
    assert code == 0 and rep["coefficient"] == "0/1" and set(rep["constants"]) == {"0/1"}


def test_crossval(capsys, tmp_path):
    png = tmp_path / "x.png"
    code, out, _ = run(
        capsys, "crossval", "--ring", "p=2;vars=x,y", "--ideal", "x,y", "--curve", "g=0,degY=1",
        "--hn", "1:-2", "--emax", "3", "--plot", str(png),
    )
    rep = json.loads(out)
    assert code == 0 and rep["agree"] is True and rep["mu_hk_inferred"] == "4/1"
    assert png.exists()
    code, out, _ = run(
        capsys, "crossval", "--ring", "p=2;vars=x,y", "--ideal", "x,y", "--curve", "g=0,degY=1", "--hn", "1:-2",
        "--emax", "3", "--gnuplot",
    )
    assert out.splitlines()[2:] == ["2 0/1", "4 0/1", "8 0/1"]


def test_crossval_disagreement_exit_code(capsys):
    # (x, y, x+y) has syzygy bundle O(-1) + O(-2); a semistable datum predicts 3/4
    args = ["crossval", "--ring", "p=2;vars=x,y", "--ideal", "x,y,x+y", "--curve", "g=0,degY=1", "--emax", "3"]
    code, out, _ = run(capsys, *args, "--hn", "1:-1;1:-2")
    assert code == 0 and json.loads(out)["agree"] is True
    code, out, _ = run(capsys, *args, "--hn", "2:-3/2")
    rep = json.loads(out)
    assert code == 4 and rep["agree"] is False
    assert rep["e_hk_measured"] == "1/1" and rep["e_hk_predicted"] == "3/4"


def test_compute_plot(capsys, tmp_path):
    png = tmp_path / "profile.png"
    code, _, _ = run(capsys, "compute", "--ring", "p=3;vars=x,y", "--ideal", "x,y", "--emax", "2", "--plot", str(png))
    assert code == 0 and png.read_bytes()[:4] == b"\x89PNG"


def test_missing_ring(capsys):
    code, _, err = run(capsys, "compute", "--ideal", "x,y")
    assert code == 2 and "--ring" in err
