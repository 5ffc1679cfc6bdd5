"""测试共用的答案与黄金目录树"""

import pytest

from pakforge import prompts

# 示例项目 montypy 的全部 16 个答案
PUBLIC_VALUES = {
    "maintainer_name": "Sir Lancelot",
    "maintainer_email": "sirlancelotbrave@montypy.com",
    "maintainer_github_username": "sirlancelotbrave",
    "contributors": "Sir Lancelot, Sir Robin, King Arthur",
    "license_holders": "The Knights of the Round Table",
    "project_name": "montypy",
    "github_username_or_orgname": "kot-roundtable",
    "project_short_description": "A Python package for the the Knights of the Round Table.",
    "project_keywords": "knights, castle, Monty, Python",
}

SYSTEM_VALUES = {
    "project_name": "diffraction-utils",
    "github_username_or_orgname": "mrneutron44",
    "contributors": "Mr Neutron",
}

WORKSPACE_PATHS = {
    "CODE-OF-CONDUCT.rst",
    "README.md",
    "requirements.txt",
    "shared_functions.py",
    ".gitignore",
    ".pre-commit-config.yaml",
    "proj-one/__init__.py",
    "proj-one/proj_one_code.py",
    "tests/__init__.py",
    "tests/test_shared_functions.py",
}


def system_paths(package_dir_path):
    return {
        "CODE-OF-CONDUCT.rst",
        "LICENSE.rst",
        "README.md",
        "pyproject.toml",
        ".pre-commit-config.yaml",
        ".flake8",
        ".gitignore",
        ".github/ISSUE_TEMPLATE/bug_feature.md",
        ".github/workflows/tests-on-pr.yml",
        "requirements/conda.txt",
        "requirements/pip.txt",
        "requirements/tests.txt",
        f"src/{package_dir_path}/__init__.py",
        f"src/{package_dir_path}/functions.py",
        "tests/test_functions.py",
    }


def public_paths(package_dir_name):
    package_dir_path = package_dir_name.replace(".", "/")
    paths = {
        ".codecov.yml",
        ".codespell/ignore_lines.txt",
        ".codespell/ignore_words.txt",
        ".flake8",
        ".github/ISSUE_TEMPLATE/bug_feature.md",
        ".github/ISSUE_TEMPLATE/release_checklist.md",
        ".github/PULL_REQUEST_TEMPLATE/pull_request_template.md",
        ".github/workflows/build-wheel-release-upload.yml",
        ".github/workflows/check-news-item.yml",
        ".github/workflows/matrix-and-codecov-on-merge-to-main.yml",
        ".github/workflows/publish-docs-on-release.yml",
        ".github/workflows/tests-on-pr.yml",
        ".gitignore",
        ".isort.cfg",
        ".pre-commit-config.yaml",
        ".readthedocs.yaml",
        "AUTHORS.rst",
        "CHANGELOG.rst",
        "CODE-OF-CONDUCT.rst",
        "LICENSE.rst",
        "MANIFEST.in",
        "README.rst",
        "docs/Makefile",
        "docs/make.bat",
        "docs/source/_static/.placeholder",
        f"docs/source/api/{package_dir_name}.example_package.rst",
        f"docs/source/api/{package_dir_name}.rst",
        "docs/source/conf.py",
        "docs/source/getting-started.rst",
        "docs/source/img/scikit-package-logo-text.png",
        "docs/source/index.rst",
        "docs/source/license.rst",
        "docs/source/release.rst",
        "docs/source/snippets/example-table.rst",
        "news/TEMPLATE.rst",
        "pyproject.toml",
        "requirements/build.txt",
        "requirements/conda.txt",
        "requirements/pip.txt",
        "requirements/tests.txt",
        "requirements/docs.txt",
        f"src/{package_dir_path}/__init__.py",
        f"src/{package_dir_path}/functions.py",
        f"src/{package_dir_path}/version.py",
        "tests/conftest.py",
        "tests/test_functions.py",
        "tests/test_version.py",
    }
    if "." in package_dir_name:
        paths.add(f"src/{package_dir_name.split('.')[0]}/__init__.py")
    return paths


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """不读取真实用户目录下的 defaults.cfg"""
    config_dir = tmp_path / "pakforge-config"
    monkeypatch.setenv("FORGE_CONFIG_DIR", str(config_dir))
    return config_dir


@pytest.fixture
def public_answers():
    return prompts.resolve_answers("public", provided=PUBLIC_VALUES)


@pytest.fixture
def system_answers():
    return prompts.resolve_answers("system", provided=SYSTEM_VALUES)


@pytest.fixture
def workspace_answers():
    return prompts.resolve_answers("workspace", provided={"folder_name": "data-analysis-projects"})


@pytest.fixture
def write_answers(tmp_path):
    """把答案写成 key = value 文件"""

    def write(values, name="answers.cfg"):
        path = tmp_path / name
        path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()), encoding="utf-8")
        return path

    return write
