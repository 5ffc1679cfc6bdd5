"""
发布计划（只演练，不执行任何上传）

标签格式为 M.m.p 或 M.m.p-rc.N；只有维护者推送的标签才能触发发布，
新标签必须大于已有的全部标签
"""

import functools
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import yaml

from .errors import InvalidTag, IoFailure, MissingMaintainer, NonMonotonicTag, Unauthorized, ValidationFailed
from .news import ChangelogDocument, collect_news, compile_changelog, read_changelog

log = logging.getLogger(__name__)

TAG_RE = re.compile(r"^(0|[1-9][0-9]*)\.(0|[1-9][0-9]*)\.(0|[1-9][0-9]*)(-rc\.(0|[1-9][0-9]*))?$")
RELEASE_WORKFLOW = Path(".github") / "workflows" / "build-wheel-release-upload.yml"
MAINTAINER_KEY = "maintainer_github_username"


@functools.total_ordering
@dataclass(frozen=True)
class ReleaseTag:
    major: int
    minor: int
    patch: int
    rc: int | None = None

    def __post_init__(self):
        for value in (self.major, self.minor, self.patch, self.rc):
            if value is not None and (not isinstance(value, int) or value < 0):
                raise InvalidTag(repr(value), "版本号必须是非负整数")

    @property
    def prerelease(self) -> bool:
        return self.rc is not None

    def sort_key(self) -> tuple:
        # 同一 M.m.p 下 rc 排在正式版之前
        return (self.major, self.minor, self.patch, self.rc is None, self.rc or 0)

    def __lt__(self, other):
        if not isinstance(other, ReleaseTag):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        text = f"{self.major}.{self.minor}.{self.patch}"
        return text if self.rc is None else f"{text}-rc.{self.rc}"


def _reject_reason(text: str) -> str:
    if not text:
        return "标签为空"
    if text != text.strip() or any(ch.isspace() for ch in text):
        return "标签不能包含空白字符"
    if text[0] in "vV":
        return "不能带 v 前缀"
    core, _, suffix = text.partition("-")
    parts = core.split(".")
    if len(parts) != 3:
        return f"需要三个由点分隔的数字，收到 {len(parts)} 个"
    if not all(part.isdigit() and part.isascii() for part in parts):
        return "版本号只能包含数字"
    if any(len(part) > 1 and part.startswith("0") for part in parts):
        return "版本号不能有前导零"
    if suffix:
        if not suffix.startswith("rc."):
            return "预发布后缀必须形如 -rc.N"
        number = suffix[3:]
        if len(number) > 1 and number.startswith("0"):
            return "rc 编号不能有前导零"
    return "格式必须为 M.m.p 或 M.m.p-rc.N"


def parse_tag(text) -> ReleaseTag:
    if not isinstance(text, str):
        raise InvalidTag(repr(text), "标签必须是字符串")
    match = TAG_RE.match(text)
    if match is None:
        raise InvalidTag(text, _reject_reason(text))
    major, minor, patch, _, rc = match.groups()
    return ReleaseTag(int(major), int(minor), int(patch), None if rc is None else int(rc))


def compare_tags(a: ReleaseTag, b: ReleaseTag) -> int:
    """a < b 返回 -1，相等返回 0，a > b 返回 1"""
    ka, kb = a.sort_key(), b.sort_key()
    return (ka > kb) - (ka < kb)


# ── 授权 ─────────────────────────────────────────────────────────────────


class Authorization(Enum):
    AUTHORIZED = "authorized"
    DENIED = "denied"


def authorize(tag_pusher: str, maintainer: str) -> Authorization:
    # 区分大小写的精确匹配
    if not maintainer:
        raise ValidationFailed("维护者用户名不能为空")
    if tag_pusher and tag_pusher == maintainer:
        return Authorization.AUTHORIZED
    return Authorization.DENIED


def _find_key(node, key):
    if isinstance(node, dict):
        if key in node:
            return node[key]
        children = node.values()
    elif isinstance(node, list):
        children = node
    else:
        return None
    for child in children:
        found = _find_key(child, key)
        if found is not None:
            return found
    return None


def read_maintainer(project_dir) -> str:
    """从生成的发布 workflow 中读取 maintainer_github_username"""
    path = Path(project_dir) / RELEASE_WORKFLOW
    if not path.is_file():
        raise MissingMaintainer(f"找不到 {path}，请用 --maintainer 指定维护者")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise IoFailure(path, e) from e
    except yaml.YAMLError as e:
        raise MissingMaintainer(f"{path} 不是合法的 YAML: {e}") from e
    maintainer = _find_key(data, MAINTAINER_KEY)
    if not isinstance(maintainer, str) or not maintainer.strip():
        raise MissingMaintainer(f"{path} 中没有 {MAINTAINER_KEY}")
    return maintainer.strip()


# ── 发布计划 ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class RepoState:
    maintainer: str
    existing_tags: tuple[str, ...] = ()
    news_dir: Path | None = None
    changelog: Path | None = None


@dataclass(frozen=True)
class ReleaseStep:
    name: str
    detail: str = ""
    prerelease: bool = False

    @property
    def descriptor(self) -> str:
        notes = [self.detail] if self.detail else []
        if self.prerelease:
            notes.append("pre-release")
        return f"{self.name} ({', '.join(notes)})" if notes else self.name


@dataclass(frozen=True)
class ReleasePlan:
    tag: ReleaseTag
    prerelease: bool
    steps: tuple[ReleaseStep, ...]
    changelog_preview: str = ""


def _existing_max(existing_tags) -> ReleaseTag | None:
    parsed = []
    for text in existing_tags:
        try:
            parsed.append(parse_tag(text))
        except InvalidTag as e:
            log.warning("忽略无法解析的已有标签: %s", e)
    return max(parsed) if parsed else None


def _changelog_preview(tag: ReleaseTag, repo_state: RepoState) -> str:
    news_dir = repo_state.news_dir
    fragments = collect_news(news_dir) if news_dir is not None and Path(news_dir).is_dir() else []
    existing = read_changelog(repo_state.changelog) if repo_state.changelog is not None else ChangelogDocument()
    return compile_changelog(str(tag), fragments, existing).releases[0].text


def plan_release(tag_text: str, pusher: str, repo_state: RepoState, conda_forge: bool = False) -> ReleasePlan:
    """
    生成发布计划

    Args:
        tag_text: 推送的标签
        pusher: 推送标签的用户
        repo_state: 维护者、已有标签、news 目录和 CHANGELOG 路径
        conda_forge: 是否追加 conda-forge 提示步骤

    Returns:
        ReleasePlan，rc 标签不生成 CHANGELOG 预览
    """
    tag = parse_tag(tag_text)
    if authorize(pusher, repo_state.maintainer) is Authorization.DENIED:
        raise Unauthorized(f"'{pusher}' 不是维护者 '{repo_state.maintainer}'，无权发布")
    existing_max = _existing_max(repo_state.existing_tags)
    if existing_max is not None and tag <= existing_max:
        raise NonMonotonicTag(tag, existing_max)

    pre = tag.prerelease
    steps = [
        ReleaseStep("publish-github-release", "" if pre else "with changelog", pre),
        ReleaseStep("deploy-docs", f"version {tag}", pre),
        ReleaseStep("upload-package-index", "", pre),
    ]
    if conda_forge:
        steps.append(ReleaseStep("emit-conda-forge-checklist"))
    preview = "" if pre else _changelog_preview(tag, repo_state)
    log.info("发布计划: %s (%s)", tag, "pre-release" if pre else "release")
    return ReleasePlan(tag=tag, prerelease=pre, steps=tuple(steps), changelog_preview=preview)


CONDA_FORGE_CHECKLIST = (
    "Update the conda-forge feedstock for this release:",
    "  - bump the version and sha256 in recipe/meta.yaml",
    "  - reset the build number to 0",
    "  - check that requirements/conda.txt matches the recipe requirements",
)


def format_plan(plan: ReleasePlan) -> str:
    lines = [f"STEP {n}: {step.descriptor}" for n, step in enumerate(plan.steps, 1)]
    if any(step.name == "emit-conda-forge-checklist" for step in plan.steps):
        lines += ["", *CONDA_FORGE_CHECKLIST]
    text = "\n".join(lines) + "\n"
    if plan.changelog_preview:
        text += "\n" + plan.changelog_preview.rstrip("\n") + "\n"
    return text
