"""The test for the qell command line."""

import json
import logging

import pytest

from qell.cli import Command, main, parse_args, run
from qell.const import CONF_CASE, CONF_ELL, CONF_FORMAT, CONF_MAP
from qell.exceptions import QellError

from .const import LEVEL3_OPTIONS, NON_COCYCLE

_LOGGER = logging.getLogger(__name__)


def test_defaults():
    """Test if the schema fills in the defaults."""
    cmd = parse_args(["velu"])
    assert cmd.name == "velu"
    assert cmd[CONF_ELL] == 3
    assert cmd[CONF_FORMAT] == "text"
    chart = parse_args(["chart"])
    assert chart[CONF_ELL] == [3, 5]
    assert chart[CONF_FORMAT] == "csv"


@pytest.mark.parametrize(
    "argv",
    [
        ["velu", "--ell", "4"],
        ["beta-table", "--family", "bogus"],
        ["bss", "--max-n", "1"],
        ["witnesses", "--case", "k4"],
    ],
)
def test_invalid_options(argv):
    """Test if invalid options stop the parser."""
    with pytest.raises(SystemExit):
        parse_args(argv)


def test_velu(capsys):
    """Test the printed level-3 quotient curve."""
    assert main(["velu", "--ell", "3"]) == 0
    out = capsys.readouterr().out
    assert "a3 = 3*a3" in out
    assert "a4 = -6*a1*a3" in out
    assert "a6 = -a1^3*a3 - 9*a3^2" in out


def test_run_velu():
    """Test if run returns the status and the document."""
    status, document = run(Command("velu", dict(LEVEL3_OPTIONS)))
    assert status == 0
    assert document.startswith("a1 = a1\n")


def test_maps(capsys):
    """Test the structure maps as csv."""
    assert main(["maps", "--ell", "3", "--map", "f", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "map,generator,image"
    assert "f,a2,0" in out


def test_unknown_map(capsys):
    """Test if an unknown map is reported with status 2."""
    assert main(["maps", "--ell", "3", "--map", "nope"]) == 2
    assert "Valid maps are" in capsys.readouterr().err
    with pytest.raises(QellError):
        run(Command("maps", {**LEVEL3_OPTIONS, CONF_MAP: "nope"}))


def test_beta_table_diff(capsys):
    """Test if the Q(3) and sphere tables are reported identical."""
    argv = ["beta-table", "--family", "q3", "--family", "sphere", "--max-i", "8", "--max-j", "12", "--diff"]
    assert main(argv) == 0
    assert capsys.readouterr().out == "Q(3) and Sphere: identical\n"


def test_beta_table_rows(capsys):
    """Test the rows of a single family."""
    assert main(["beta-table", "--family", "sphere", "--max-i", "4", "--max-j", "4", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "sphere,a3^4/(8*v1^2),1,2,2,3" in out
    assert "sphere,1/(8*v1^2),0,-1,2,3" in out



def test_witnesses(capsys):
    """Test if the stored unit witnesses are certified."""
    assert main(["witnesses", "--case", "unit"]) == 0
    out = capsys.readouterr().out
    assert "1/(2^k v1^j): 1/(8*v1^4): OK" in out
    assert "k = 1" not in out
    assert parse_args(["witnesses"])[CONF_CASE] == []

def test_verify_cocycle(capsys):
    """Test if a3/(4 v1) is reported as a non-cocycle."""
    argv = ["verify-cocycle"]
    for element in NON_COCYCLE:
        argv += ["--element", element]
    assert main(argv) == 1
    out = capsys.readouterr().out
    assert "cocycle: False" in out
    assert "modulus: (2^2, v1^2)" in out


def test_verify_cocycle_elements_file(tmp_path, capsys):
    """Test if a JSON element description gives the same verdict as --element."""
    path = tmp_path / "elements.json"
    path.write_text(json.dumps([{"numerator": "a3", "k": 2, "j": 1}]), encoding="utf-8")
    assert main(["verify-cocycle", "--elements-file", str(path), "--format", "json"]) == 1
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["cocycle"] is False
    assert rows[0]["modulus"] == "(2^2, v1^2)"


def test_verify_cocycle_without_elements(capsys):
    """Test if verify-cocycle without any element is rejected."""
    assert main(["verify-cocycle"]) == 2
    assert "No elements given" in capsys.readouterr().err


def test_e2(capsys):
    """Test the E2 chart as json."""
    assert main(["e2", "--max-weight", "2", "--max-s", "2", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {"stem": -2, "s": 2, "group": "Z/4", "generators": "beta"} in rows


def test_tate_normal_form(capsys):
    """Test the Tate normal form round trip from the command line."""
    assert main(["tate-normal-form", "--b", "2", "--b", "1/3", "--samples", "3"]) == 0
    assert capsys.readouterr().out


def test_bss_output_file(tmp_path):
    """Test if the v1-Bockstein differentials are written to a file."""
    path = tmp_path / "bss.txt"
    assert main(["bss", "--ell", "3", "--max-m", "1", "--max-n", "2", "--output", str(path)]) == 0
    assert "d1(a3^1/v1^j) = h2/v1^(j-1)" in path.read_text(encoding="utf-8")


def test_d1_table_compare(capsys):
    """Test the level-3 table against the reference."""
    assert main(["d1-table", "--ell", "3", "--max-weight", "4", "--compare"]) == 0
    assert "4\t1\tv1^4 -> 16*v1*v2" in capsys.readouterr().out


def test_chart_json(capsys):
    """Test the json chart of both levels."""
    assert main(["chart", "--max-weight", "4", "--format", "json"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert [table["ell"] for table in document["tables"]] == [3, 5]
