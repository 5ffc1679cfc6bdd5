"""
项目名称推导与校验
由用户输入的 project_name 推导仓库名、发行名和源码目录名，
支持 <namespace>.<package> 形式的命名空间包（最多一级）
"""

import re
from dataclasses import dataclass

from .errors import InvalidName

# 输入段：小写字母开头，后接小写字母、数字、连字符或下划线
SEGMENT_RE = re.compile(r"^[a-z][a-z0-9_-]*$")
# 目录段：小写字母或下划线开头，后接小写字母、数字、下划线
DIR_SEGMENT_RE = re.compile(r"^[a-z_][a-z0-9_]*$")


@dataclass(frozen=True)
class ProjectName:
    raw: str
    namespace: str | None
    package: str

    def segments(self) -> list[str]:
        return [self.package] if self.namespace is None else [self.namespace, self.package]


@dataclass(frozen=True)
class DerivedNames:
    github_repo_name: str
    dist_name: str
    dir_name: str


def _check_segment(segment: str, raw: str) -> None:
    if not segment:
        raise InvalidName(f"名称 '{raw}' 含有空的段")
    if not segment.isascii():
        raise InvalidName(f"名称 '{raw}' 含有非 ASCII 字符")
    if segment != segment.lower():
        raise InvalidName(f"名称 '{raw}' 含有大写字母，请改用小写: '{raw.lower()}'")
    if SEGMENT_RE.match(segment) is None:
        if segment[0].isdigit():
            raise InvalidName(f"名称 '{raw}' 的段 '{segment}' 不能以数字开头")
        raise InvalidName(
            f"名称 '{raw}' 的段 '{segment}' 只能包含小写字母、数字、连字符和下划线"
        )


def split_namespace(project_name: str) -> tuple[str | None, str]:
    """
    拆分命名空间

    Args:
        project_name: 用户输入的名称，例如 'montypy.grail'

    Returns:
        (namespace, package) 元组，没有点号时 namespace 为 None
    """
    if not project_name:
        raise InvalidName("名称不能为空")
    parts = project_name.split(".")
    if len(parts) > 2:
        raise InvalidName(f"名称 '{project_name}' 最多只能有一级命名空间（一个点号）")
    for part in parts:
        _check_segment(part, project_name)
    if len(parts) == 1:
        return None, parts[0]
    return parts[0], parts[1]


def parse_project_name(raw: str) -> ProjectName:
    namespace, package = split_namespace(raw)
    return ProjectName(raw=raw, namespace=namespace, package=package)


def normalize_dir_name(project_name: ProjectName) -> str:
    """每段的连字符替换为下划线，保留命名空间的点号"""
    dir_segments = [segment.replace("-", "_") for segment in project_name.segments()]
    for segment in dir_segments:
        if DIR_SEGMENT_RE.match(segment) is None:
            raise InvalidName(f"无法从 '{project_name.raw}' 得到合法的目录名")
    return ".".join(dir_segments)


def derive_defaults(project_name: ProjectName) -> DerivedNames:
    return DerivedNames(
        github_repo_name=project_name.raw,
        dist_name=project_name.raw,
        dir_name=normalize_dir_name(project_name),
    )


def validate_dir_name(text: str) -> str:
    """校验手动输入的 package_dir_name"""
    parts = text.split(".")
    if len(parts) > 2:
        raise InvalidName(f"目录名 '{text}' 最多只能有一级命名空间")
    for part in parts:
        if DIR_SEGMENT_RE.match(part) is None:
            raise InvalidName(
                f"目录名 '{text}' 的段 '{part}' 只能包含小写字母、数字和下划线（不能有连字符）"
            )
    return text


def dir_name_to_path(dir_name: str) -> str:
    return dir_name.replace(".", "/")
