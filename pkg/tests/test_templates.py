import hashlib
import io
import itertools
import random

import pytest
import yaml
from PIL import Image

from conftest import PUBLIC_VALUES, SYSTEM_VALUES, WORKSPACE_PATHS, public_paths, system_paths
from pakforge import prompts, templates
from pakforge.errors import (
    BundleError,
    IoFailure,
    RootExists,
    UnknownLevel,
    UnknownPlaceholder,
    ValidationFailed,
)

BLACK_BLOCK = """[tool.black]
line-length = 79
include = '\\.pyi?$'
exclude = '''
/(
    \\.git
  | \\.hg
  | \\.mypy_cache
  | \\.tox
  | \\.venv
  | \\.rst
  | \\.txt
  | _build
  | buck-out
  | build
  | dist
  | blib2to3
  | tests/data
)/
'''
"""

# 两道选择题只允许改变这些文件的内容
CONDITIONAL_FILES = {
    ".github/workflows/build-wheel-release-upload.yml",
    ".github/workflows/matrix-and-codecov-on-merge-to-main.yml",
    ".github/workflows/tests-on-pr.yml",
}


def public_tree(**overrides):
    answers = prompts.resolve_answers("public", provided={**PUBLIC_VALUES, **overrides})
    return templates.render_tree("public", answers)


def text_files(tree):
    return [(path, data) for path, data in tree.files if not path.endswith(".png")]


# ── render_template ──────────────────────────────────────────────────────


@pytest.mark.parametrize(
    "text, context, expected",
    [
        ("Maintainer: {{ maintainer_name }}", {"maintainer_name": "Sir Lancelot"}, "Maintainer: Sir Lancelot"),
        ("no markers", {}, "no markers"),
        ("{{ a }}{{ a }}", {"a": "x"}, "xx"),
        ("{{a}} and {{   a }}", {"a": "x"}, "x and x"),
        ("${PYTHONPATH} {tag}", {}, "${PYTHONPATH} {tag}"),
    ],
)
def test_render_template(text, context, expected):
    assert templates.render_template(text, context) == expected


def test_render_template_unknown_key():
    with pytest.raises(UnknownPlaceholder) as excinfo:
        templates.render_template("hello {{ nobody }}", {}, "README.md")
    assert excinfo.value.key == "nobody"
    assert excinfo.value.location == "README.md"


@pytest.mark.parametrize(
    "text", ["{{ 1bad }}", "a }} b", "{{ open", "{{ a.b }}", "{% if a %}x{% endif %}", "{# note #}", "{{ a | upper }}"]
)
def test_render_template_stray_markers(text):
    with pytest.raises(UnknownPlaceholder):
        templates.render_template(text, {"a": "x"})


def test_render_template_value_cannot_create_marker():
    with pytest.raises(UnknownPlaceholder):
        templates.render_template("{{{ a }}", {"a": "{"})


# ── build_context ────────────────────────────────────────────────────────


def test_build_context_derived_keys(public_answers):
    context = templates.build_context(public_answers)
    assert context["python_versions"] == "3.11 3.12 3.13"
    assert context["python_upper_bound"] == "3.14"
    assert context["python_classifiers"].splitlines() == [
        '  "Programming Language :: Python :: 3.11",',
        '  "Programming Language :: Python :: 3.12",',
        '  "Programming Language :: Python :: 3.13",',
    ]
    assert context["project_keywords_toml"] == '"knights", "castle", "Monty", "Python"'
    assert (context["namespace"], context["package"], context["import_name"]) == ("", "montypy", "montypy")


def test_build_context_namespace():
    answers = prompts.resolve_answers("public", provided={**PUBLIC_VALUES, "project_name": "montypy.grail"})
    context = templates.build_context(answers)
    assert context["package_dir_path"] == "montypy/grail"
    assert (context["namespace"], context["package"]) == ("montypy", "grail")


# ── 黄金目录树 ───────────────────────────────────────────────────────────


def test_workspace_golden_tree(workspace_answers):
    tree = templates.render_tree("workspace", workspace_answers)
    assert tree.root_name == "data-analysis-projects"
    assert set(tree.paths()) == WORKSPACE_PATHS
    readme = tree.content("README.md").decode()
    assert "PYTHONPATH" in readme and "data-analysis-projects" in readme


def test_system_golden_tree(system_answers):
    tree = templates.render_tree("system", system_answers)
    assert tree.root_name == "diffraction-utils"
    assert set(tree.paths()) == system_paths("diffraction_utils")
    assert "src/diffraction_utils/functions.py" in tree.paths()
    assert "requirements/conda.txt" in tree.paths()


def test_public_golden_tree(public_answers):
    tree = templates.render_tree("public", public_answers)
    assert tree.root_name == "montypy"
    assert set(tree.paths()) == public_paths("montypy")


def test_public_namespace_tree():
    tree = public_tree(project_name="montypy.grail")
    paths = set(tree.paths())
    assert paths == public_paths("montypy.grail")
    assert "src/montypy/__init__.py" in paths
    assert "src/montypy/grail/__init__.py" in paths
    assert "extend_path" in tree.content("src/montypy/__init__.py").decode()
    assert "from montypy.grail.version import __version__" in tree.content("src/montypy/grail/__init__.py").decode()


def test_system_namespace_tree():
    answers = prompts.resolve_answers("system", provided={**SYSTEM_VALUES, "project_name": "xraylab.utils"})
    paths = set(templates.render_tree("system", answers).paths())
    assert paths == system_paths("xraylab/utils") | {"src/xraylab/__init__.py"}


def test_tree_is_sorted_and_deterministic(public_answers):
    first = templates.render_tree("public", public_answers)
    second = templates.render_tree("public", public_answers)
    assert first == second
    assert first.paths() == sorted(first.paths())


def test_no_markers_in_output(public_answers, system_answers, workspace_answers):
    for level, answers in [("public", public_answers), ("system", system_answers), ("workspace", workspace_answers)]:
        tree = templates.render_tree(level, answers)
        for path, data in text_files(tree):
            text = data.decode("utf-8")
            assert "{{" not in path and "}}" not in path
            assert "{{" not in text and "}}" not in text, path
            assert "\r" not in text, path
            assert text == "" or text.endswith("\n"), path


def test_placeholder_file_is_empty(public_answers):
    tree = templates.render_tree("public", public_answers)
    assert tree.content("docs/source/_static/.placeholder") == b""


def test_logo_is_copied_verbatim(public_answers):
    tree = templates.render_tree("public", public_answers)
    data = tree.content("docs/source/img/scikit-package-logo-text.png")
    assert data == (templates.TEMPLATES_DIR / "common" / "logo.png").read_bytes()
    with Image.open(io.BytesIO(data)) as image:
        image.verify()


def test_public_pyproject_black_block(public_answers):
    pyproject = templates.render_tree("public", public_answers).content("pyproject.toml").decode()
    assert BLACK_BLOCK in pyproject
    assert 'name = "montypy"' in pyproject
    assert 'requires-python = ">=3.11, <3.14"' in pyproject


def test_system_pyproject_black_block(system_answers):
    pyproject = templates.render_tree("system", system_answers).content("pyproject.toml").decode()
    assert "[tool.black]\nline-length = 79\n" in pyproject


def test_yaml_files_parse(public_answers):
    tree = templates.render_tree("public", public_answers)
    for path, data in tree.files:
        if path.endswith((".yml", ".yaml")):
            assert yaml.safe_load(data.decode()) is not None, path


def test_release_workflow_names_maintainer(public_answers):
    tree = templates.render_tree("public", public_answers)
    workflow = yaml.safe_load(tree.content(".github/workflows/build-wheel-release-upload.yml"))
    assert workflow["env"]["maintainer_github_username"] == "sirlancelotbrave"
    assert "${{" not in tree.content(".github/workflows/build-wheel-release-upload.yml").decode()


def test_news_template_matches_bundle(public_answers):
    from pakforge import news

    tree = templates.render_tree("public", public_answers)
    assert tree.content("news/TEMPLATE.rst").decode() == news.NEWS_TEMPLATE


@pytest.mark.parametrize("c_code, gui", list(itertools.product(["No", "Yes"], repeat=2)))
def test_choice_toggles_only_change_designated_files(c_code, gui, public_answers):
    baseline = templates.render_tree("public", public_answers)
    toggled = public_tree(project_needs_c_code_compiled=c_code, project_has_gui_tests=gui)
    assert toggled.paths() == baseline.paths()
    changed = {path for (path, a), (_, b) in zip(baseline.files, toggled.files) if a != b}
    assert changed <= CONDITIONAL_FILES
    build = toggled.content(".github/workflows/build-wheel-release-upload.yml").decode()
    tests_on_pr = toggled.content(".github/workflows/tests-on-pr.yml").decode()
    assert ("cibuildwheel" in build) == (c_code == "Yes")
    assert ("xvfb" in tests_on_pr) == (gui == "Yes")


def test_render_tree_rejects_other_level(system_answers):
    with pytest.raises(ValidationFailed):
        templates.render_tree("public", system_answers)
    with pytest.raises(UnknownLevel):
        templates.render_tree("module", system_answers)


# ── 模板包 ───────────────────────────────────────────────────────────────


def test_bundles_load():
    for level in prompts.Level:
        bundle = templates.load_bundle(level)
        assert bundle.entries
    conditional = [e for e in templates.load_bundle("public").entries if e.condition]
    assert {str(e.condition) for e in conditional} == {
        "project_needs_c_code_compiled=No",
        "project_needs_c_code_compiled=Yes",
        "project_has_gui_tests=No",
        "project_has_gui_tests=Yes",
    }


def make_bundle(tmp_path, level, manifest):
    (tmp_path / "common").mkdir(exist_ok=True)
    (tmp_path / "common" / "body.txt").write_text("hello {{ folder_name }}\n", encoding="utf-8")
    (tmp_path / level).mkdir(exist_ok=True)
    (tmp_path / level / "MANIFEST").write_text(manifest, encoding="utf-8")
    return tmp_path


@pytest.mark.parametrize(
    "level, manifest",
    [
        ("workspace", "README.md\n"),
        ("workspace", "a\tb\tc\td\n"),
        ("workspace", "README.md\tcommon/missing.txt\n"),
        ("workspace", "folder_name=x\tREADME.md\tcommon/body.txt\n"),
        ("public", "project_has_gui_tests=Maybe\tREADME.md\tcommon/body.txt\n"),
        ("public", "project_has_gui_tests=Yes\tREADME.md\tcommon/body.txt\n"),
        ("public", "README.md\tcommon/body.txt\nproject_has_gui_tests=Yes\tREADME.md\tcommon/body.txt\n"),
    ],
)
def test_bad_manifests(tmp_path, level, manifest):
    root = make_bundle(tmp_path, level, manifest)
    with pytest.raises(BundleError):
        templates.load_bundle(level, root)


def test_custom_bundle_renders(tmp_path, workspace_answers):
    root = make_bundle(tmp_path, "workspace", "# comment\n\n{{ folder_name }}.txt\tcommon/body.txt\n")
    tree = templates.render_tree("workspace", workspace_answers, root)
    assert tree.files == (("data-analysis-projects.txt", b"hello data-analysis-projects\n"),)


def test_rendered_path_must_stay_relative(tmp_path, workspace_answers):
    root = make_bundle(tmp_path, "workspace", "../escape.txt\tcommon/body.txt\n")
    with pytest.raises(BundleError):
        templates.render_tree("workspace", workspace_answers, root)


# ── write_tree ───────────────────────────────────────────────────────────


def digests(root):
    return {
        p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in root.rglob("*")
        if p.is_file()
    }


def test_write_tree_empty_destination(tmp_path, public_answers):
    tree = templates.render_tree("public", public_answers)
    report = templates.write_tree(tree, tmp_path)
    assert report.written == tree.paths()
    assert report.skipped_existing == []
    assert set(digests(tmp_path / "montypy")) == set(tree.paths())
    assert (tmp_path / "montypy" / "pyproject.toml").read_bytes() == tree.content("pyproject.toml")


def test_write_tree_keeps_existing_file(tmp_path, system_answers):
    tree = templates.render_tree("system", system_answers)
    root = tmp_path / tree.root_name
    root.mkdir()
    (root / "README.md").write_text("X", encoding="utf-8")
    report = templates.write_tree(tree, tmp_path)
    assert report.skipped_existing == ["README.md"]
    assert "README.md" not in report.written
    assert (root / "README.md").read_text(encoding="utf-8") == "X"


def test_write_tree_random_subsets(tmp_path, public_answers):
    tree = templates.render_tree("public", public_answers)
    rng = random.Random(2024)
    for trial in range(20):
        destination = tmp_path / f"trial{trial}"
        (destination / tree.root_name).mkdir(parents=True)
        subset = set(rng.sample(tree.paths(), rng.randint(0, len(tree.paths()))))
        for path in subset:
            target = destination / tree.root_name / path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(f"pre-existing {path}".encode())
        before = digests(destination / tree.root_name)

        report = templates.write_tree(tree, destination)

        assert set(report.skipped_existing) == subset
        assert set(report.written) == set(tree.paths()) - subset
        assert not set(report.written) & set(report.skipped_existing)
        after = digests(destination / tree.root_name)
        assert all(after[path] == before[path] for path in subset)


def test_write_tree_is_idempotent(tmp_path, workspace_answers):
    tree = templates.render_tree("workspace", workspace_answers)
    templates.write_tree(tree, tmp_path)
    second = templates.write_tree(tree, tmp_path)
    assert second.written == []
    assert set(second.skipped_existing) == WORKSPACE_PATHS


def test_write_tree_root_exists(tmp_path, workspace_answers):
    tree = templates.render_tree("workspace", workspace_answers)
    (tmp_path / tree.root_name).mkdir()
    with pytest.raises(RootExists):
        templates.write_tree(tree, tmp_path, exist_ok=False)


def test_write_tree_overwrites_without_no_clobber(tmp_path, workspace_answers):
    tree = templates.render_tree("workspace", workspace_answers)
    root = tmp_path / tree.root_name
    root.mkdir()
    (root / "README.md").write_text("old", encoding="utf-8")
    report = templates.write_tree(tree, tmp_path, no_clobber=False)
    assert "README.md" in report.written
    assert (root / "README.md").read_bytes() == tree.content("README.md")


def test_write_tree_missing_destination(tmp_path, workspace_answers):
    tree = templates.render_tree("workspace", workspace_answers)
    with pytest.raises(IoFailure):
        templates.write_tree(tree, tmp_path / "nowhere")


def test_print_summary(tmp_path, workspace_answers, capsys):
    tree = templates.render_tree("workspace", workspace_answers)
    templates.write_tree(tree, tmp_path)
    report = templates.write_tree(tree, tmp_path)
    templates.print_summary(report)
    out = capsys.readouterr().out
    assert "✓ 新写入: 0" in out
    assert f"✗ 已存在跳过: {len(WORKSPACE_PATHS)}" in out
