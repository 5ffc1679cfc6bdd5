"""
模板包的加载、渲染与写盘

每个级别的模板包位于 templates/<level>/MANIFEST，每行一个条目：
    [条件 TAB] 路径模板 TAB 模板文件
条件形如 key=Option，只能引用该级别的选择题；模板文件相对 templates/ 目录，
可以共用 templates/common/ 下的文件
"""

import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import jinja2

from . import names
from .errors import BundleError, IoFailure, RootExists, UnknownPlaceholder, ValidationFailed
from .prompts import Level, ProjectAnswers, parse_level, python_minor, question_set

log = logging.getLogger(__name__)

TEMPLATES_DIR = Path(__file__).parent / "templates"
MANIFEST_NAME = "MANIFEST"
NAMESPACE_INIT_BODY = "common/namespace_init.py"

PLACEHOLDER_RE = re.compile(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}")
STRAY_RE = re.compile(r"\{\{(.*?)\}\}")
MARKERS = ("{{", "}}")
# 只支持 {{ key }}，语句和注释标记一律视为残留
JINJA_OPENERS = ("{%", "{#")
# 按字节原样复制，不做渲染
BINARY_SUFFIXES = frozenset({".png"})

_JINJA = jinja2.Environment(undefined=jinja2.StrictUndefined, keep_trailing_newline=True, autoescape=False)


@dataclass(frozen=True)
class Condition:
    key: str
    option: str

    def matches(self, values) -> bool:
        return values.get(self.key) == self.option

    def __str__(self) -> str:
        return f"{self.key}={self.option}"


@dataclass(frozen=True)
class BundleEntry:
    path_template: str
    body: str
    condition: Condition | None = None
    line: int = 0


@dataclass(frozen=True)
class TemplateBundle:
    level: Level
    entries: tuple[BundleEntry, ...]
    root: Path = TEMPLATES_DIR

    def read_body(self, entry: BundleEntry) -> bytes:
        path = self.root / entry.body
        try:
            return path.read_bytes()
        except OSError as e:
            raise IoFailure(path, e) from e


@dataclass(frozen=True)
class RenderedTree:
    root_name: str
    files: tuple[tuple[str, bytes], ...]

    def paths(self) -> list[str]:
        return [path for path, _ in self.files]

    def content(self, path: str) -> bytes:
        for candidate, data in self.files:
            if candidate == path:
                return data
        raise KeyError(path)


@dataclass
class WriteReport:
    root: Path
    written: list[str] = field(default_factory=list)
    skipped_existing: list[str] = field(default_factory=list)


# ── 占位符渲染 ───────────────────────────────────────────────────────────


def render_template(text: str, context, location: str = "<template>") -> str:
    """
    替换文本中的 {{ key }} 占位符

    Args:
        text: 模板文本
        context: 占位符取值
        location: 出错时报告的位置

    Returns:
        渲染后的文本，其余字符保持不变
    """
    remainder = PLACEHOLDER_RE.sub("", text)
    stray = STRAY_RE.search(remainder)
    if stray is not None:
        raise UnknownPlaceholder(stray.group(1).strip() or stray.group(0), location)
    for marker in (*MARKERS, *JINJA_OPENERS):
        if marker in remainder:
            raise UnknownPlaceholder(marker, location)
    for key in PLACEHOLDER_RE.findall(text):
        if key not in context:
            raise UnknownPlaceholder(key, location)

    try:
        rendered = _JINJA.from_string(text).render(context)
    except jinja2.TemplateSyntaxError as e:
        raise UnknownPlaceholder(MARKERS[0], f"{location}:{e.lineno}") from e
    except jinja2.UndefinedError as e:
        raise UnknownPlaceholder(str(e), location) from e
    for marker in MARKERS:
        if marker in rendered:
            raise UnknownPlaceholder(marker, f"{location} (替换后的内容)")
    return rendered


def build_context(answers: ProjectAnswers) -> dict[str, str]:
    """答案加上模板里用到的派生值"""
    context = dict(answers.values)

    dir_name = context.get("package_dir_name")
    if dir_name is not None:
        namespace, _, package = dir_name.rpartition(".")
        context["package_dir_path"] = names.dir_name_to_path(dir_name)
        context["import_name"] = dir_name
        context["namespace"] = namespace
        context["package"] = package

    low = context.get("minimum_supported_python_version")
    high = context.get("maximum_supported_python_version")
    if low is not None and high is not None:
        versions = [f"3.{minor}" for minor in range(python_minor(low), python_minor(high) + 1)]
        context["python_versions"] = " ".join(versions)
        context["python_upper_bound"] = f"3.{python_minor(high) + 1}"
        context["python_classifiers"] = "\n".join(
            f'  "Programming Language :: Python :: {version}",' for version in versions
        )

    keywords = context.get("project_keywords")
    if keywords is not None:
        words = [word.strip() for word in keywords.split(",") if word.strip()]
        context["project_keywords_toml"] = ", ".join(json.dumps(word) for word in words)
    return context


# ── 模板包 ───────────────────────────────────────────────────────────────


def _parse_condition(text: str, choices: dict[str, tuple[str, ...]], where: str) -> Condition:
    key, sep, option = text.partition("=")
    if not sep:
        raise BundleError(f"{where}: 条件必须形如 key=Option，收到 '{text}'")
    if key not in choices:
        raise BundleError(f"{where}: 条件引用了不是选择题的 key '{key}'")
    if option not in choices[key]:
        raise BundleError(f"{where}: {key} 没有选项 '{option}'")
    return Condition(key, option)


def _check_alternatives(entries: list[BundleEntry], choices, manifest: Path) -> None:
    """同一路径要么只有一个无条件条目，要么由同一道选择题的每个选项各给一个条目"""
    by_path: dict[str, list[BundleEntry]] = {}
    for entry in entries:
        by_path.setdefault(entry.path_template, []).append(entry)
    for path, group in by_path.items():
        if len(group) == 1 and group[0].condition is None:
            continue
        if any(entry.condition is None for entry in group):
            raise BundleError(f"{manifest}: 路径 {path} 同时有条件和无条件的条目")
        keys = {entry.condition.key for entry in group}
        if len(keys) != 1:
            raise BundleError(f"{manifest}: 路径 {path} 的条件引用了多个 key")
        options = [entry.condition.option for entry in group]
        if sorted(options) != sorted(choices[keys.pop()]):
            raise BundleError(f"{manifest}: 路径 {path} 的条件没有恰好覆盖每个选项一次")


def load_bundle(level, templates_dir=None) -> TemplateBundle:
    level = parse_level(level)
    root = Path(templates_dir) if templates_dir is not None else TEMPLATES_DIR
    manifest = root / level.value / MANIFEST_NAME
    try:
        text = manifest.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(manifest, e) from e

    choices = {q.key: q.choices for q in question_set(level) if q.is_choice}
    entries = []
    for line_num, line in enumerate(text.splitlines(), 1):
        if line.startswith("#") or not line.strip():
            continue
        where = f"{manifest}:{line_num}"
        fields = line.split("\t")
        if len(fields) == 2:
            condition = None
            path_template, body = fields
        elif len(fields) == 3:
            condition = _parse_condition(fields[0], choices, where)
            path_template, body = fields[1:]
        else:
            raise BundleError(f"{where}: 需要 2 或 3 个 TAB 分隔的字段，收到 {len(fields)} 个")
        if not path_template or not body:
            raise BundleError(f"{where}: 路径和模板文件都不能为空")
        if not (root / body).is_file():
            raise BundleError(f"{where}: 模板文件不存在 {body}")
        entries.append(BundleEntry(path_template, body, condition, line_num))

    _check_alternatives(entries, choices, manifest)
    log.debug("已加载 %s 模板包，共 %d 个条目", level, len(entries))
    return TemplateBundle(level=level, entries=tuple(entries), root=root)


# ── 渲染 ─────────────────────────────────────────────────────────────────


def _check_relative_path(path: str, where: str) -> None:
    parts = path.split("/")
    if path.startswith("/") or "\\" in path or any(part in ("", ".", "..") for part in parts):
        raise BundleError(f"{where}: 渲染后的路径不是合法的相对路径 '{path}'")


def _render_body(raw: bytes, body: str, context) -> bytes:
    if Path(body).suffix.lower() in BINARY_SUFFIXES:
        return raw
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise BundleError(f"模板文件 {body} 不是 UTF-8 文本: {e}") from e
    rendered = render_template(text, context, body)
    rendered = rendered.replace("\r\n", "\n").replace("\r", "\n")
    if rendered and not rendered.endswith("\n"):
        rendered += "\n"
    return rendered.encode("utf-8")


def render_tree(level, answers: ProjectAnswers, templates_dir=None) -> RenderedTree:
    """
    渲染某个级别的完整目录树

    Args:
        level: workspace / system / public
        answers: 该级别解析完成的答案
        templates_dir: 模板根目录，默认使用随包发布的 templates/

    Returns:
        按路径排序的 RenderedTree
    """
    level = parse_level(level)
    if answers.level != level:
        raise ValidationFailed(f"答案属于 {answers.level} 级别，不能用于渲染 {level}")
    bundle = load_bundle(level, templates_dir)
    context = build_context(answers)

    files: dict[str, bytes] = {}
    for entry in bundle.entries:
        if entry.condition is not None and not entry.condition.matches(answers.values):
            continue
        where = f"{level.value}/{MANIFEST_NAME}:{entry.line}"
        path = render_template(entry.path_template, context, where)
        _check_relative_path(path, where)
        if path in files:
            raise BundleError(f"{where}: 重复的路径 {path}")
        files[path] = _render_body(bundle.read_body(entry), entry.body, context)

    # 命名空间包需要在 src/<namespace>/ 下补一个 __init__.py
    namespace = context.get("namespace")
    if namespace:
        init_path = f"src/{namespace}/__init__.py"
        if init_path not in files:
            raw = bundle.read_body(BundleEntry(init_path, NAMESPACE_INIT_BODY))
            files[init_path] = _render_body(raw, NAMESPACE_INIT_BODY, context)

    root_name = answers["folder_name"] if level == Level.WORKSPACE else answers["github_repo_name"]
    log.info("%s 级别渲染完成: %s (%d 个文件)", level, root_name, len(files))
    return RenderedTree(root_name=root_name, files=tuple(sorted(files.items())))


# ── 写盘 ─────────────────────────────────────────────────────────────────


def write_tree(tree: RenderedTree, destination, no_clobber: bool = True, exist_ok: bool = True) -> WriteReport:
    """
    将目录树写入 destination/<root_name>

    Args:
        tree: render_tree 的结果
        destination: 已存在的目标目录
        no_clobber: 已存在的文件保持不变并记入 skipped_existing
        exist_ok: 为 False 时根目录已存在即报 RootExists

    Returns:
        WriteReport
    """
    destination = Path(destination)
    if not destination.is_dir():
        raise IoFailure(destination, FileNotFoundError("目标目录不存在"))
    root = destination / tree.root_name
    if root.exists() and not exist_ok:
        raise RootExists(f"目录 {root} 已存在")

    report = WriteReport(root=root)
    for path, content in tree.files:
        target = root / path
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            if no_clobber:
                try:
                    with open(target, "xb") as f:
                        f.write(content)
                except FileExistsError:
                    log.info("已存在，跳过: %s", path)
                    report.skipped_existing.append(path)
                    continue
            else:
                target.write_bytes(content)
        except OSError as e:
            raise IoFailure(target, e) from e
        log.debug("写入 %s", path)
        report.written.append(path)
    return report


def print_summary(report: WriteReport, file=None):
    """打印写盘摘要"""
    file = file or sys.stdout
    print("\n" + "=" * 60, file=file)
    print(f"生成目录: {report.root}", file=file)
    print("=" * 60, file=file)
    print(f"  ✓ 新写入: {len(report.written)}", file=file)
    print(f"  ✗ 已存在跳过: {len(report.skipped_existing)}", file=file)
    if report.skipped_existing:
        print("\n以下文件已存在，未覆盖:", file=file)
        for path in report.skipped_existing:
            print(f"  - {path}", file=file)
    print("=" * 60, file=file)
