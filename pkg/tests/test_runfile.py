import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latspec.errors import (
    DanglingConstraint,
    DuplicateAssignment,
    RunFileSyntaxError,
    UnknownElement,
    UnknownLattice,
    UsageError,
)
from latspec.runfile import (
    AssignmentLine,
    ConstraintLine,
    RunSpec,
    derive_constraints,
    parse_run_file,
    read_run_file,
    render_run_file,
)
from latspec.spectra import generate_run_spec

ASSIGN = "\\lattice=N5 \\with x=b y=a z=c"
CONSTRAINT = "\\if N5 \\with x=b y=a z=c \\ThenNot C2 \\with x=0 y=0 z=1"
C2_LINE = "\\lattice=C2 \\with x=0 y=0 z=1"


def test_quoted_lines_parse_and_render_verbatim(catalog):
    rs = parse_run_file("\n".join([ASSIGN, C2_LINE, CONSTRAINT]) + "\n", catalog)
    assert rs.assignments[0] == AssignmentLine("N5", "b", "a", "c")
    assert rs.constraints[0] == ConstraintLine(rs.assignments[0], rs.assignments[1])
    assert rs.constraint_pairs() == [(0, 1)]
    assert render_run_file(rs).splitlines() == [ASSIGN, C2_LINE, CONSTRAINT]


def test_shipped_files_round_trip(catalog, runs_dir):
    files = sorted(runs_dir.glob("*.run"))
    assert len(files) >= 13
    for path in files:
        rs = read_run_file(path, catalog)
        assert parse_run_file(render_run_file(rs), catalog) == rs, path.name
        assert render_run_file(parse_run_file(render_run_file(rs))) == render_run_file(rs)


@pytest.mark.parametrize(
    "name",
    ["as_mn5", "as_ml3", "as_mh6", "ds_mn5", "ds_ml1", "ds_ml3", "ds_ml4", "ds_ml5", "free_distributive", "free_modular"],
)
def test_shipped_files_are_regenerated_exactly(catalog, runs_dir, name):
    rs = read_run_file(runs_dir / f"{name}.run", catalog)
    names = list(dict.fromkeys(a.lattice_name for a in rs.assignments))
    mode = "atoms" if name.startswith("as_") else "double"
    assert generate_run_spec(catalog, names, mode, constraints=bool(rs.constraints)) == rs


def test_mh6_file_has_seventeen_assignments(catalog, runs_dir):
    assert len(read_run_file(runs_dir / "as_mh6.run", catalog).assignments) == 17


def test_derived_constraints_contain_quoted_line(catalog, runs_dir):
    rs = read_run_file(runs_dir / "ds_ml3.run", catalog)
    lines = {c.render() for c in derive_constraints(rs, catalog)}
    assert CONSTRAINT in lines


def test_constraints_only_point_to_smaller_quotients(catalog, runs_dir):
    rs = read_run_file(runs_dir / "as_mh6.run", catalog)
    for c in rs.constraints:
        assert catalog[c.if_part.lattice_name].n > catalog[c.then_not_part.lattice_name].n


def test_comments_blank_lines_and_crlf():
    rs = parse_run_file("# header\r\n\r\n" + ASSIGN + "\r\n   \n" + C2_LINE)
    assert len(rs.assignments) == 2
    assert rs.lines == (3, 5)


@pytest.mark.parametrize(
    "text, column",
    [
        ("\\lattice=N5 \\with x=b y=a", 26),
        ("\\lattice=N5\t\\with x=b y=a z=c", 12),
        ("\\lattice=N5 \\with x=b y=a z=c junk", 31),
        ("\\latice=N5 \\with x=b y=a z=c", 1),
        ("\\lattice=N5 \\with y=b x=a z=c", 19),
        ("\\if N5 \\with x=b y=a z=c \\Then C2 \\with x=0 y=0 z=1", 26),
    ],
)
def test_syntax_errors_carry_line_and_column(text, column):
    with pytest.raises(RunFileSyntaxError) as e:
        parse_run_file("# c\n" + text, path="t.run")
    assert e.value.line == 2 and e.value.column == column
    assert str(e.value).startswith("t.run:2: column")
    assert isinstance(e.value, UsageError)


def test_semantic_errors(catalog):
    with pytest.raises(UnknownLattice):
        parse_run_file("\\lattice=Q7 \\with x=a y=b z=c", catalog)
    with pytest.raises(UnknownElement) as e:
        parse_run_file("\\lattice=N5 \\with x=a y=b z=q", catalog)
    assert e.value.name == "q"
    with pytest.raises(DuplicateAssignment) as e:
        parse_run_file(ASSIGN + "\n" + ASSIGN, catalog)
    assert e.value.line == 2 and e.value.first == 1
    with pytest.raises(DanglingConstraint):
        parse_run_file(ASSIGN + "\n" + CONSTRAINT, catalog)


def test_without_drops_constraints(catalog, runs_dir):
    rs = read_run_file(runs_dir / "ds_ml3.run", catalog)
    cut = rs.without("M3")
    assert len(cut.assignments) == len(rs.assignments) - 1
    assert all("M3" not in c.render() for c in cut.constraints)


names = st.from_regex(r"[A-Za-z0-9_]{1,4}", fullmatch=True)
assignments = st.builds(AssignmentLine, names, names, names, names)


@settings(max_examples=200, deadline=None)
@given(st.lists(assignments, min_size=1, max_size=8, unique=True), st.data())
def test_round_trip_property(parts, data):
    pairs = data.draw(st.lists(st.tuples(st.sampled_from(parts), st.sampled_from(parts)), max_size=5))
    rs = RunSpec(tuple(parts), tuple(ConstraintLine(a, b) for a, b in pairs))
    text = render_run_file(rs)
    assert parse_run_file(text) == rs
    # extra spaces between tokens are tolerated and normalized away
    assert parse_run_file(text.replace(" ", "   ")) == rs
