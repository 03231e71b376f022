import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from structured_mppi.plot import SummaryFormatError, read_summary, write_plots

GOLDEN = Path(__file__).parent / "golden"

SUMMARY = """\
# steps_mean/steps_std include failed trials counted at max_steps
task,method,success_pct,steps_mean,steps_std,time_mean_ms,time_std_ms
flat,Normal,100,75.2,3.1,1.05,0.2
flat,CubicSpline-k4,100,71.4,2.2,1.31,0.25
stairs,Normal,10,382,55,1.1,0.2
stairs,CubicSpline-k4,100,190,12.5,1.3,0.3
big-box,Normal,40,300,120,1.0,0.1
big-box,LinearInterp-w10,50,280,110,1.1,0.1
big-box,CubicSpline-k4,100,120,8,1.3,0.1
"""


@pytest.fixture
def summary(tmp_path):
    path = tmp_path / "x.summary.csv"
    path.write_text(SUMMARY)
    return path


def test_one_svg_per_task(summary, tmp_path):
    paths = write_plots(summary, tmp_path / "svg")
    assert [p.name for p in paths] == ["flat.svg", "stairs.svg", "big-box.svg"]
    for p in paths:
        root = ET.parse(p).getroot()
        assert root.tag.endswith("svg")
    texts = [t.text for t in ET.parse(paths[2]).getroot().iter("{http://www.w3.org/2000/svg}text")]
    assert "40%" in texts and "LinearInterp-w10" in texts


def test_output_deterministic(summary, tmp_path):
    a = write_plots(summary, tmp_path / "a")
    b = write_plots(summary, tmp_path / "b")
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]


def test_golden_svg(summary, tmp_path):
    (path,) = [p for p in write_plots(summary, tmp_path) if p.name == "stairs.svg"]
    assert path.read_text() == (GOLDEN / "stairs.svg").read_text()


@pytest.mark.parametrize("body, line", [
    ("", 1),
    ("task,method,success_pct,steps_mean,steps_std,time_mean_ms,time_std_ms\n", 2),
    ("task,method,oops\n", 1),
    ("task,method,success_pct,steps_mean,steps_std,time_mean_ms,time_std_ms\nflat,A,1\n", 2),
])
def test_malformed_reports_line(tmp_path, body, line):
    path = tmp_path / "s.csv"
    path.write_text(body)
    with pytest.raises(SummaryFormatError) as info:
        read_summary(path)
    assert info.value.line == line
