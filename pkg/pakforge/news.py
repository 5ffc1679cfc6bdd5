"""
news 文件与 CHANGELOG

每个 PR 在 news/ 下新增一个 <name>.rst（由 news/TEMPLATE.rst 复制而来），
发布时把全部 news 汇总成 CHANGELOG.rst 顶部的一个版本块
"""

import logging
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    AlreadyExists,
    DuplicateVersion,
    FragmentParseError,
    InvalidSection,
    IoFailure,
    ValidationFailed,
)

log = logging.getLogger(__name__)

SECTIONS = ("Added", "Changed", "Deprecated", "Removed", "Fixed", "Security")
PLACEHOLDER_ITEM = "<news-item>"
TEMPLATE_NAME = "TEMPLATE.rst"
NO_CHANGES = "No significant changes."

NEWS_TEMPLATE = "\n".join(f"**{section}:**\n\n* {PLACEHOLDER_ITEM}\n" for section in SECTIONS)

# 输入宽松：**Added:** 与 **Added: ** 都接受；输出固定为 **Added: **
SECTION_HEADER_RE = re.compile(r"^\*\*(?P<name>[A-Za-z]+):\s?\*\*\s*$")
ITEM_RE = re.compile(r"^ ?\* (?P<text>.*)$")
NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")
# 版本标题：版本号一行，下一行是等长的 '='
VERSION_LINE_RE = re.compile(r"^[0-9][0-9A-Za-z.+-]*$")


@dataclass(frozen=True)
class NewsFragment:
    source_name: str
    sections: dict[str, list[str]]

    def items(self) -> list[str]:
        return [item for section in SECTIONS for item in self.sections.get(section, [])]


@dataclass(frozen=True)
class ChangelogRelease:
    version: str
    sections: dict[str, list[str]]
    text: str


@dataclass
class ChangelogDocument:
    preamble: str = ""
    releases: list[ChangelogRelease] = field(default_factory=list)

    def versions(self) -> list[str]:
        return [release.version for release in self.releases]


@dataclass(frozen=True)
class NewsCheck:
    passed: bool
    message: str
    matches: tuple[str, ...] = ()


def _check_section(section: str) -> str:
    if section not in SECTIONS:
        raise InvalidSection(f"未知小节 '{section}'，可选: {', '.join(SECTIONS)}")
    return section


# ── news 文件 ────────────────────────────────────────────────────────────


def create_news(news_dir, name: str, section: str, item: str) -> Path:
    """
    按 TEMPLATE.rst 的格式新建 news/<name>.rst，只替换指定小节的 <news-item>

    Returns:
        新文件路径
    """
    _check_section(section)
    if NAME_RE.match(name) is None or name.endswith(".rst") or name == Path(TEMPLATE_NAME).stem:
        raise ValidationFailed(f"无效的 news 文件名 '{name}'")
    item = item.strip()
    if not item or "\n" in item or PLACEHOLDER_ITEM in item:
        raise ValidationFailed("news 条目必须是非空的单行文本，且不能包含 <news-item>")

    text = "\n".join(
        f"**{s}:**\n\n* {item if s == section else PLACEHOLDER_ITEM}\n" for s in SECTIONS
    )
    news_dir = Path(news_dir)
    path = news_dir / f"{name}.rst"
    try:
        news_dir.mkdir(parents=True, exist_ok=True)
        with open(path, "x", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except FileExistsError:
        raise AlreadyExists(f"news 文件已存在: {path}") from None
    except OSError as e:
        raise IoFailure(path, e) from e
    log.info("已创建 %s (%s)", path, section)
    return path


def parse_fragment(text: str, source_name: str) -> NewsFragment:
    """解析一个 news 文件；缩进的续行拼接到上一条，只剩 <news-item> 的小节被跳过"""
    sections: dict[str, list[str]] = {}
    current = None
    continuing = False
    for line_num, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continuing = False
            continue
        header = SECTION_HEADER_RE.match(line.rstrip())
        item = ITEM_RE.match(line.rstrip())
        if header is not None:
            name = header.group("name")
            if name not in SECTIONS:
                raise FragmentParseError(source_name, line_num, f"未知小节 '{name}'")
            current = name
            sections.setdefault(current, [])
            continuing = False
        elif item is not None:
            if current is None:
                raise FragmentParseError(source_name, line_num, "条目不在任何小节下")
            content = item.group("text").strip()
            if not content:
                raise FragmentParseError(source_name, line_num, "空条目")
            sections[current].append(content)
            continuing = True
        elif continuing and line[0].isspace():
            sections[current][-1] += " " + line.strip()
        else:
            raise FragmentParseError(source_name, line_num, f"无法识别的行: {line!r}")

    kept: dict[str, list[str]] = {}
    for section in SECTIONS:
        items = [i for i in sections.get(section, []) if i != PLACEHOLDER_ITEM]
        for i in items:
            if PLACEHOLDER_ITEM in i:
                raise FragmentParseError(source_name, 0, f"{section} 小节的条目里残留 {PLACEHOLDER_ITEM}")
        if items:
            kept[section] = items
    return NewsFragment(source_name=source_name, sections=kept)


def _fragment_files(news_dir: Path) -> list[Path]:
    if not news_dir.is_dir():
        raise IoFailure(news_dir, NotADirectoryError("news 目录不存在"))
    return sorted(
        (p for p in news_dir.glob("*.rst") if p.is_file() and p.name != TEMPLATE_NAME),
        key=lambda p: p.name,
    )


def collect_news(news_dir) -> list[NewsFragment]:
    fragments = []
    for path in _fragment_files(Path(news_dir)):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise IoFailure(path, e) from e
        fragment = parse_fragment(text, path.name)
        if not fragment.sections:
            log.warning("%s 中没有填写任何条目", path.name)
        fragments.append(fragment)
    log.info("共读取 %d 个 news 文件", len(fragments))
    return fragments


def clear_news(news_dir, dry_run: bool = False) -> list[Path]:
    """删除已汇总的 news 文件，TEMPLATE.rst 保留"""
    removed = []
    for path in _fragment_files(Path(news_dir)):
        if not dry_run:
            try:
                path.unlink()
            except OSError as e:
                raise IoFailure(path, e) from e
        removed.append(path)
    log.info("%s %d 个 news 文件", "将删除" if dry_run else "已删除", len(removed))
    return removed


def check_news_present(changed_paths: Iterable[str]) -> NewsCheck:
    """PR 改动中至少有一个 news/*.rst（TEMPLATE.rst 除外）时通过"""
    matches = []
    for raw in changed_paths:
        path = raw.strip().replace("\\", "/")
        while path.startswith("./"):
            path = path[2:]
        parts = path.split("/")
        if (
            len(parts) == 2
            and parts[0] == "news"
            and parts[1].endswith(".rst")
            and parts[1] not in (TEMPLATE_NAME, ".rst")
        ):
            matches.append(path)
    if matches:
        return NewsCheck(True, f"找到 news 文件: {', '.join(matches)}", tuple(matches))
    return NewsCheck(
        False,
        "PR 中没有 news 文件: 请把 news/TEMPLATE.rst 复制为 news/<分支名>.rst 并在对应小节填写改动",
    )


# ── CHANGELOG ────────────────────────────────────────────────────────────


def merge_fragments(fragments: Iterable[NewsFragment]) -> dict[str, list[str]]:
    """按固定小节顺序合并，小节内保持 news 文件的顺序"""
    merged: dict[str, list[str]] = {}
    fragments = list(fragments)
    for section in SECTIONS:
        items = [item for fragment in fragments for item in fragment.sections.get(section, [])]
        if items:
            merged[section] = items
    return merged


def format_release(version: str, sections: Mapping[str, list[str]]) -> str:
    parts = [f"{version}\n{'=' * len(version)}\n\n"]
    present = [s for s in SECTIONS if sections.get(s)]
    if not present:
        parts.append(f"{NO_CHANGES}\n\n")
    for section in present:
        parts.append(f"**{section}: **\n\n")
        parts.extend(f" * {item}\n" for item in sections[section])
        parts.append("\n")
    return "".join(parts)


def _is_heading(lines: list[str], i: int) -> bool:
    title = lines[i].rstrip("\n")
    if VERSION_LINE_RE.match(title) is None or i + 1 >= len(lines):
        return False
    underline = lines[i + 1].rstrip("\n")
    if underline != "=" * len(title):
        return False
    # 上方有同长 '=' 的是带上划线的文档标题
    return not (i > 0 and lines[i - 1].rstrip("\n") == underline)


def _parse_release_sections(block_lines: list[str]) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current = None
    for line in block_lines:
        header = SECTION_HEADER_RE.match(line.rstrip())
        item = ITEM_RE.match(line.rstrip())
        if header is not None and header.group("name") in SECTIONS:
            current = header.group("name")
        elif item is not None and current is not None:
            sections.setdefault(current, []).append(item.group("text").strip())
        elif current is not None and line[:1].isspace() and line.strip() and sections.get(current):
            sections[current][-1] += " " + line.strip()
    return sections


def parse_changelog(text: str) -> ChangelogDocument:
    lines = text.replace("\r\n", "\n").splitlines(keepends=True)
    starts = [i for i in range(len(lines)) if _is_heading(lines, i)]
    if not starts:
        return ChangelogDocument(preamble="".join(lines))
    releases = []
    for start, end in zip(starts, starts[1:] + [len(lines)]):
        block = lines[start:end]
        releases.append(
            ChangelogRelease(
                version=block[0].strip(),
                sections=_parse_release_sections(block[2:]),
                text="".join(block),
            )
        )
    return ChangelogDocument(preamble="".join(lines[: starts[0]]), releases=releases)


def format_changelog(doc: ChangelogDocument) -> str:
    preamble = doc.preamble
    if preamble and doc.releases:
        preamble = preamble.rstrip("\n") + "\n\n"
    return preamble + "".join(release.text for release in doc.releases)


def compile_changelog(version: str, fragments: Iterable[NewsFragment], existing: ChangelogDocument) -> ChangelogDocument:
    """
    在文档最前面加入新版本块，不修改 existing

    Args:
        version: 合法的版本标签文本
        fragments: collect_news 的结果
        existing: 当前的 CHANGELOG

    Returns:
        新的 ChangelogDocument
    """
    from .release import parse_tag

    parse_tag(version)
    if version in existing.versions():
        raise DuplicateVersion(f"CHANGELOG 中已有版本 {version}")
    sections = merge_fragments(fragments)
    release = ChangelogRelease(version, sections, format_release(version, sections))
    return ChangelogDocument(preamble=existing.preamble, releases=[release, *existing.releases])


def read_changelog(path) -> ChangelogDocument:
    """读取 CHANGELOG，文件不存在时返回空文档"""
    path = Path(path)
    if not path.exists():
        log.warning("%s 不存在，将新建", path)
        return ChangelogDocument()
    try:
        return parse_changelog(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise IoFailure(path, e) from e


def write_changelog(path, doc: ChangelogDocument) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(format_changelog(doc))
    except OSError as e:
        raise IoFailure(path, e) from e
