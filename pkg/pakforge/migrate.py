"""
旧项目迁移到新目录结构

对旧树和新生成的树分别做内容哈希快照，按 deleted / untracked / modified /
unchanged 分类，并跟踪迁移完成的五个条件。复制文件一律不覆盖（cp -n）
"""

import hashlib
import logging
import os
import shutil
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

from tqdm import tqdm
from tqdm.contrib.logging import logging_redirect_tqdm

from .errors import ConfigParseError, InvalidAction, IoFailure, ManifestError, UnknownPath, ValidationFailed

log = logging.getLogger(__name__)

ALGORITHM = "sha256"
HEADER_PREFIX = "# pakforge-manifest "
CHUNK_SIZE = 1 << 20
# 文件数少于该值时不显示进度条
PROGRESS_THRESHOLD = 100

ACTIONS = ("moved", "removed", "added", "merged")
LINT_FILES = (".pre-commit-config.yaml", ".isort.cfg", ".flake8")
LINT_DIRS = (".codespell",)

CHECKLIST_DESCRIPTIONS = (
    "All files showing as deleted that need to be preserved have been moved",
    "All files showing as deleted that are no longer needed have been removed",
    "All untracked files have been added",
    "All modified files have been merged",
    "All resulting changes have been reviewed and the migration is complete",
)


@dataclass(frozen=True)
class Manifest:
    root: Path | None
    algorithm: str = ALGORITHM
    entries: dict[str, str] = field(default_factory=dict)
    skipped: tuple[str, ...] = ()

    def paths(self) -> list[str]:
        return sorted(self.entries)


@dataclass(frozen=True)
class MigrationPlan:
    deleted: tuple[str, ...] = ()
    untracked: tuple[str, ...] = ()
    modified: tuple[str, ...] = ()
    unchanged: tuple[str, ...] = ()

    def categories(self) -> dict[str, tuple[str, ...]]:
        return {
            "deleted": self.deleted,
            "untracked": self.untracked,
            "modified": self.modified,
            "unchanged": self.unchanged,
        }


@dataclass(frozen=True)
class ChecklistItem:
    description: str
    satisfied: bool


@dataclass(frozen=True)
class CompletionChecklist:
    items: tuple[ChecklistItem, ...]

    @property
    def complete(self) -> bool:
        return all(item.satisfied for item in self.items)


@dataclass(frozen=True)
class CopyResult:
    status: str  # copied | skipped | extracted
    src: Path
    dst: Path
    src_digest: str | None = None
    dst_digest: str | None = None


# ── 快照 ─────────────────────────────────────────────────────────────────


def hash_file(path, algorithm: str = ALGORITHM) -> str:
    digest = hashlib.new(algorithm)
    try:
        with open(path, "rb") as f:
            while chunk := f.read(CHUNK_SIZE):
                digest.update(chunk)
    except OSError as e:
        raise IoFailure(path, e) from e
    return digest.hexdigest()


def _walk_files(root: Path, exclude: Iterable[str]) -> tuple[list[str], list[str]]:
    """返回 (普通文件, 跳过的符号链接)，均为相对 root 的 '/' 路径"""
    exclude = set(exclude)
    files, skipped = [], []
    for dirpath, dirnames, filenames in os.walk(root):
        current = Path(dirpath)
        kept = []
        for name in sorted(dirnames):
            if name in exclude:
                continue
            if (current / name).is_symlink():
                skipped.append((current / name).relative_to(root).as_posix())
                continue
            kept.append(name)
        dirnames[:] = kept
        for name in sorted(filenames):
            path = current / name
            rel = path.relative_to(root).as_posix()
            if path.is_symlink():
                skipped.append(rel)
            elif path.is_file():
                files.append(rel)
    return files, skipped


def snapshot_tree(root, exclude: Iterable[str] = (), workers: int | None = None) -> Manifest:
    """
    对目录下所有普通文件做 sha256 快照

    Args:
        root: 目录
        exclude: 整个跳过的目录名，例如 .git
        workers: 并行哈希的线程数，默认 CPU 核数 - 1

    Returns:
        Manifest，符号链接不跟随，记在 skipped 中
    """
    root = Path(root)
    if not root.is_dir():
        raise IoFailure(root, NotADirectoryError("目录不存在"))
    files, skipped = _walk_files(root, exclude)
    for rel in skipped:
        log.warning("⚠ 跳过符号链接: %s", rel)

    workers = workers or max(1, (os.cpu_count() or 2) - 1)
    entries = {}
    with logging_redirect_tqdm():
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(hash_file, root / rel): rel for rel in files}
            for future in tqdm(
                as_completed(futures),
                total=len(futures),
                desc=f"计算哈希 {root.name}",
                disable=len(futures) < PROGRESS_THRESHOLD,
            ):
                entries[futures[future]] = future.result()

    log.info("%s: %d 个文件, 跳过 %d 个符号链接", root, len(entries), len(skipped))
    return Manifest(root=root, entries=dict(sorted(entries.items())), skipped=tuple(skipped))


def dump_manifest(manifest: Manifest) -> str:
    lines = [f"{HEADER_PREFIX}{manifest.algorithm}"]
    lines += [f"{manifest.entries[path]}\t{path}" for path in manifest.paths()]
    return "\n".join(lines) + "\n"


def parse_manifest(text: str, source="<string>") -> Manifest:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER_PREFIX):
        raise ManifestError(f"{source}: 缺少 '{HEADER_PREFIX.strip()} <algorithm>' 头")
    algorithm = lines[0][len(HEADER_PREFIX):].strip()
    if algorithm not in hashlib.algorithms_available:
        raise ManifestError(f"{source}: 不支持的哈希算法 '{algorithm}'")
    entries = {}
    for line_num, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        digest, sep, path = line.partition("\t")
        if not sep or not digest or not path:
            raise ManifestError(f"{source}:{line_num}: 需要 'digest TAB path'")
        if path in entries:
            raise ManifestError(f"{source}:{line_num}: 重复的路径 {path}")
        entries[path] = digest
    return Manifest(root=None, algorithm=algorithm, entries=entries)


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(path, e) from e
    return parse_manifest(text, path)


def load_or_snapshot(path, exclude: Iterable[str] = (".git",)) -> Manifest:
    """目录则现场快照，文件则按 manifest 读取"""
    path = Path(path)
    if path.is_dir():
        return snapshot_tree(path, exclude=exclude)
    return load_manifest(path)


# ── 分类与完成条件 ───────────────────────────────────────────────────────


def diff_manifests(old: Manifest, new: Manifest) -> MigrationPlan:
    if old.algorithm != new.algorithm:
        raise ManifestError(f"哈希算法不一致: {old.algorithm} vs {new.algorithm}")
    old_paths, new_paths = set(old.entries), set(new.entries)
    common = old_paths & new_paths
    return MigrationPlan(
        deleted=tuple(sorted(old_paths - new_paths)),
        untracked=tuple(sorted(new_paths - old_paths)),
        modified=tuple(sorted(p for p in common if old.entries[p] != new.entries[p])),
        unchanged=tuple(sorted(p for p in common if old.entries[p] == new.entries[p])),
    )


def checklist(
    plan: MigrationPlan,
    resolved: Mapping[str, str],
    reviewed: bool = False,
    preserve: Iterable[str] | None = None,
) -> CompletionChecklist:
    """
    计算五个完成条件

    Args:
        plan: diff_manifests 的结果
        resolved: 路径 -> 已执行的动作 (moved / removed / added / merged)
        reviewed: 人工确认所有改动已审阅
        preserve: deleted 中必须保留的路径；为 None 时无法区分需要保留和不再需要的文件，
            以 resolved 中的动作为准

    Returns:
        CompletionChecklist，deleted 中未归类的路径同时使条件 1 和 2 不满足
    """
    known = set(plan.deleted) | set(plan.untracked) | set(plan.modified) | set(plan.unchanged)
    for path, action in resolved.items():
        if path not in known:
            raise UnknownPath(f"迁移计划中没有路径 {path}")
        if action not in ACTIONS:
            raise InvalidAction(f"{path}: 未知动作 '{action}'，可选: {', '.join(ACTIONS)}")

    deleted_actions = {p: resolved.get(p) for p in plan.deleted}
    if preserve is None:
        keep = {p for p, action in deleted_actions.items() if action == "moved"}
    else:
        keep = set(preserve)
        outside = sorted(keep - set(plan.deleted))
        if outside:
            raise UnknownPath(f"需要保留的路径不在 deleted 中: {', '.join(outside)}")
    unresolved = any(action not in ("moved", "removed") for action in deleted_actions.values())
    moved_done = not unresolved and all(deleted_actions[p] == "moved" for p in keep)
    removed_done = not unresolved and all(
        action == "removed" for p, action in deleted_actions.items() if p not in keep
    )
    untracked_done = all(resolved.get(p) == "added" for p in plan.untracked)
    modified_done = all(resolved.get(p) == "merged" for p in plan.modified)
    flags = [
        moved_done,
        removed_done,
        untracked_done,
        modified_done,
        moved_done and removed_done and untracked_done and modified_done and reviewed,
    ]
    return CompletionChecklist(
        tuple(ChecklistItem(text, flag) for text, flag in zip(CHECKLIST_DESCRIPTIONS, flags))
    )


def parse_resolved(text: str, source="<string>") -> dict[str, str]:
    """每行 '<action> <path>'，# 开头为注释"""
    resolved = {}
    for line_num, line in enumerate(text.splitlines(), 1):
        if line.startswith("#") or not line.strip():
            continue
        action, _, path = line.strip().partition(" ")
        path = path.strip()
        if not path:
            raise ConfigParseError(source, line_num, "需要 '<action> <path>'")
        if action not in ACTIONS:
            raise InvalidAction(f"{source}:{line_num}: 未知动作 '{action}'")
        resolved[path] = action
    return resolved


def load_resolved(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(path, e) from e
    return parse_resolved(text, path)


def load_path_list(path) -> list[str]:
    """每行一个路径，忽略空行与 # 注释"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(path, e) from e
    lines = (line.strip() for line in text.splitlines())
    return [line for line in lines if line and not line.startswith("#")]


def format_migration_plan(plan: MigrationPlan) -> str:
    lines = []
    for name, paths in plan.categories().items():
        lines.append(f"{name} ({len(paths)}):")
        lines += [f"  {path}" for path in paths]
    return "\n".join(lines) + "\n"


def format_checklist(result: CompletionChecklist) -> str:
    lines = [
        f"[{'x' if item.satisfied else ' '}] {n}. {item.description}"
        for n, item in enumerate(result.items, 1)
    ]
    return "\n".join(lines) + "\n"


# ── 不覆盖的复制 ─────────────────────────────────────────────────────────


def _digest_or_none(path: Path) -> str | None:
    return hash_file(path) if path.is_file() else None


def _copy_file(src: Path, dst: Path) -> CopyResult:
    try:
        dst.parent.mkdir(parents=True, exist_ok=True)
        with open(src, "rb") as fin:
            try:
                fout = open(dst, "xb")
            except FileExistsError:
                log.info("目标已存在，跳过: %s", dst)
                return CopyResult("skipped", src, dst, hash_file(src), _digest_or_none(dst))
            with fout:
                shutil.copyfileobj(fin, fout)
        shutil.copymode(src, dst)
    except OSError as e:
        raise IoFailure(dst, e) from e
    digest = hash_file(dst)
    return CopyResult("copied", src, dst, digest, digest)


def copy_no_clobber(src, dst) -> CopyResult:
    """
    等价于 cp -n：目标存在时不写入，返回两边的哈希供人工比对
    dst 是已存在的目录时复制到 dst/<src 文件名>
    """
    src, dst = Path(src), Path(dst)
    if not src.is_file():
        raise IoFailure(src, FileNotFoundError("源文件不存在"))
    if dst.is_dir():
        dst = dst / src.name
    return _copy_file(src, dst)


def _copy_contents(src_dir: Path, dst_dir: Path) -> list[CopyResult]:
    files, skipped = _walk_files(src_dir, ())
    for rel in skipped:
        log.warning("⚠ 跳过符号链接: %s", rel)
    return [_copy_file(src_dir / rel, dst_dir / rel) for rel in files]


def copy_tree_no_clobber(src_dir, dst_dir) -> list[CopyResult]:
    """等价于 cp -n -r：dst_dir 已存在时复制到 dst_dir/<src_dir 名>"""
    src_dir, dst_dir = Path(src_dir), Path(dst_dir)
    if not src_dir.is_dir():
        raise IoFailure(src_dir, NotADirectoryError("源目录不存在"))
    target = dst_dir / src_dir.name if dst_dir.is_dir() else dst_dir
    results = _copy_contents(src_dir, target)
    log.info(
        "%s -> %s: 复制 %d, 跳过 %d",
        src_dir,
        target,
        sum(r.status == "copied" for r in results),
        sum(r.status == "skipped" for r in results),
    )
    return results


def extract_black_block(pyproject_text: str) -> str:
    """取出 [tool.black] 表，到下一个表头为止"""
    lines = pyproject_text.splitlines()
    try:
        start = next(i for i, line in enumerate(lines) if line.strip() == "[tool.black]")
    except StopIteration:
        raise ValidationFailed("pyproject.toml 中没有 [tool.black]") from None
    end = len(lines)
    for i in range(start + 1, len(lines)):
        if lines[i].startswith("["):
            end = i
            break
    return "\n".join(lines[start:end]).rstrip() + "\n"


def copy_lint_config(new_root, old_root) -> list[CopyResult]:
    """
    先迁移代码规范配置：把新生成项目的 lint 配置复制到旧项目（不覆盖），
    旧项目没有 pyproject.toml 时写入只含 [tool.black] 的版本
    """
    new_root, old_root = Path(new_root), Path(old_root)
    for root in (new_root, old_root):
        if not root.is_dir():
            raise IoFailure(root, NotADirectoryError("目录不存在"))

    results = []
    for name in LINT_FILES:
        if (new_root / name).is_file():
            results.append(_copy_file(new_root / name, old_root / name))
        else:
            log.warning("新项目中没有 %s", name)
    for name in LINT_DIRS:
        if (new_root / name).is_dir():
            results += _copy_contents(new_root / name, old_root / name)

    src, dst = new_root / "pyproject.toml", old_root / "pyproject.toml"
    if dst.exists():
        log.info("%s 已存在，请手动合并 [tool.black]", dst)
        results.append(CopyResult("skipped", src, dst, _digest_or_none(src), _digest_or_none(dst)))
    elif src.is_file():
        try:
            block = extract_black_block(src.read_text(encoding="utf-8"))
            with open(dst, "x", encoding="utf-8", newline="\n") as f:
                f.write(block)
        except OSError as e:
            raise IoFailure(dst, e) from e
        results.append(CopyResult("extracted", src, dst, None, hash_file(dst)))
    return results
