"""
各级别的提问清单与答案解析
答案按优先级逐层解析：
    answers 文件 > 交互输入 > 用户默认配置 (defaults.cfg) > 内置默认值
由 project_name 推导的默认值在 project_name 解析后重新计算
"""

import logging
import os
import re
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache
from pathlib import Path

import yaml

from . import names
from .errors import (
    ConfigParseError,
    IoFailure,
    MissingAnswer,
    UnknownAnswerKey,
    UnknownLevel,
    ValidationFailed,
)

log = logging.getLogger(__name__)

QUESTIONS_FILE = Path(__file__).parent / "questions.yaml"
CONFIG_ENV = "FORGE_CONFIG_DIR"
CONFIG_FILENAME = "defaults.cfg"
# 交互输入连续无效时的最大重试次数
MAX_ATTEMPTS = 3

KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
PYTHON_VERSION_RE = re.compile(r"^3\.(0|[1-9][0-9]*)$")


class Level(StrEnum):
    WORKSPACE = "workspace"
    SYSTEM = "system"
    PUBLIC = "public"


def parse_level(text) -> Level:
    try:
        return Level(text)
    except ValueError:
        raise UnknownLevel(
            f"未知级别 '{text}'，可选: {', '.join(level.value for level in Level)}"
        ) from None


@dataclass(frozen=True)
class Question:
    key: str
    index: int
    kind: str = "text"  # text | choice
    default: str | int | None = None
    choices: tuple[str, ...] = ()
    derived_from: str | None = None
    derive: str | None = None

    @property
    def is_choice(self) -> bool:
        return self.kind == "choice"


@dataclass(frozen=True)
class ProjectAnswers:
    level: Level
    values: dict[str, str]
    derived: names.DerivedNames | None = field(default=None)

    def __getitem__(self, key: str) -> str:
        return self.values[key]


# Callback 签名: respond(question, total, shown_default) -> 用户输入的原始文本
Respond = Callable[[Question, int, str], str]


# ── 提问清单 ─────────────────────────────────────────────────────────────


@lru_cache(maxsize=None)
def _load_question_table() -> dict:
    with open(QUESTIONS_FILE, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


def _build_question(spec: dict, index: int, level: Level) -> Question:
    choices = tuple(str(option) for option in spec.get("choices", ()))
    kind = "choice" if choices else "text"
    default = spec.get("default")
    if kind == "choice":
        if len(choices) < 2:
            raise ValidationFailed(f"{level}: 选择题 {spec['key']} 至少需要两个选项")
        if not isinstance(default, int) or not 1 <= default <= len(choices):
            raise ValidationFailed(f"{level}: 选择题 {spec['key']} 的默认选项序号无效")
    elif default is not None:
        default = str(default)
    return Question(
        key=spec["key"],
        index=index,
        kind=kind,
        default=default,
        choices=choices,
        derived_from=spec.get("derived_from"),
        derive=spec.get("derive"),
    )


def question_set(level) -> list[Question]:
    """
    返回某个级别按顺序排列的提问清单

    Args:
        level: workspace / system / public

    Returns:
        Question 列表，index 从 1 开始连续编号
    """
    level = parse_level(level)
    specs = _load_question_table().get(level.value) or []
    questions = [_build_question(spec, i, level) for i, spec in enumerate(specs, 1)]
    keys = [q.key for q in questions]
    if len(set(keys)) != len(keys):
        raise ValidationFailed(f"{level}: 提问清单中存在重复的 key")
    return questions


# ── 配置文件 ─────────────────────────────────────────────────────────────


def parse_key_values(text: str, path="<string>") -> dict[str, str]:
    """
    解析 `key = value` 格式的文本
    # 开头的行为注释，空行忽略，重复的 key 以最后一次为准
    """
    data = {}
    for line_num, line in enumerate(text.splitlines(), 1):
        if line.startswith("#") or not line.strip():
            continue
        if "=" not in line:
            raise ConfigParseError(path, line_num, f"缺少 '=': {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigParseError(path, line_num, "缺少 key")
        if KEY_RE.match(key) is None:
            raise ConfigParseError(path, line_num, f"非法的 key: {key!r}")
        if not value:
            raise ConfigParseError(path, line_num, f"{key} 的值为空")
        data[key] = value
    return data


def default_config_path(environ: Mapping[str, str] | None = None) -> Path:
    environ = os.environ if environ is None else environ
    if environ.get(CONFIG_ENV):
        return Path(environ[CONFIG_ENV]) / CONFIG_FILENAME
    if environ.get("XDG_CONFIG_HOME"):
        return Path(environ["XDG_CONFIG_HOME"]) / "pakforge" / CONFIG_FILENAME
    return Path.home() / ".config" / "pakforge" / CONFIG_FILENAME


def load_user_defaults(config_path) -> dict[str, str]:
    """读取用户默认配置，文件不存在时返回空字典"""
    config_path = Path(config_path)
    if not config_path.is_file():
        log.debug("未找到用户默认配置 %s", config_path)
        return {}
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(config_path, e) from e
    data = parse_key_values(text, config_path)
    log.info("已读取用户默认配置 %s (%d 项)", config_path, len(data))
    return data


def load_answers_file(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(path, e) from e
    return parse_key_values(text, path)


# ── 答案校验 ─────────────────────────────────────────────────────────────


def _coerce(question: Question, raw) -> str:
    text = str(raw).strip()
    if not text:
        raise ValidationFailed(f"{question.key} 不能为空")
    if "{{" in text or "}}" in text:
        raise ValidationFailed(f"{question.key} 不能包含占位符标记 '{{{{' 或 '}}}}'")
    if not question.is_choice:
        return text
    if text.isdigit():
        position = int(text)
        if 1 <= position <= len(question.choices):
            return question.choices[position - 1]
    for option in question.choices:
        if option.lower() == text.lower():
            return option
    raise ValidationFailed(
        f"{question.key} 只能选择 {'/'.join(question.choices)} 或其序号，收到 '{text}'"
    )


def _check_single_segment(key: str, value: str) -> None:
    if value in (".", "..") or "/" in value or "\\" in value:
        raise ValidationFailed(f"{key} 必须是单个目录名，收到 '{value}'")


def _validate(question: Question, value: str, values: dict[str, str]) -> None:
    key = question.key
    if key == "project_name":
        names.parse_project_name(value)
    elif key == "package_dir_name":
        names.validate_dir_name(value)
    elif key in ("folder_name", "github_repo_name"):
        _check_single_segment(key, value)
    elif key == "conda_pypi_package_dist_name":
        if any(ch.isspace() for ch in value):
            raise ValidationFailed(f"{key} 不能包含空白字符，收到 '{value}'")
    elif key in ("minimum_supported_python_version", "maximum_supported_python_version"):
        if PYTHON_VERSION_RE.match(value) is None:
            raise ValidationFailed(f"{key} 必须形如 3.N，收到 '{value}'")
        low = values.get("minimum_supported_python_version")
        if key.startswith("maximum") and low is not None:
            if python_minor(low) > python_minor(value):
                raise ValidationFailed(f"最低 Python 版本 {low} 高于最高版本 {value}")


def python_minor(version: str) -> int:
    return int(version.split(".")[1])


def _builtin_default(question: Question, values: dict[str, str]) -> str | None:
    if question.derived_from is not None:
        source = values.get(question.derived_from)
        if source is None:
            return None
        derived = names.derive_defaults(names.parse_project_name(source))
        return getattr(derived, question.derive)
    if question.is_choice:
        return question.choices[question.default - 1]
    return question.default


def _layer_default(question: Question, user_defaults: Mapping[str, str], values) -> str | None:
    """用户默认配置优先于内置默认值；配置中的值无效时忽略并回退到内置默认值"""
    if question.key in user_defaults:
        try:
            value = _coerce(question, user_defaults[question.key])
            _validate(question, value, values)
            return value
        except ValidationFailed as e:
            log.warning("忽略用户默认配置中无效的 %s: %s", question.key, e)
    return _builtin_default(question, values)


def shown_default(question: Question, default: str | None) -> str:
    """提示中括号里显示的默认值，选择题显示选项序号"""
    if default is None:
        return ""
    if question.is_choice:
        return str(question.choices.index(default) + 1)
    return default


def format_prompt(question: Question, total: int, default: str) -> str:
    head = f"  [{question.index}/{total}]"
    if not question.is_choice:
        return f"{head} {question.key} ({default}): "
    lines = [f"{head} Select {question.key}"]
    lines += [f"    {i} - {option}" for i, option in enumerate(question.choices, 1)]
    numbers = "/".join(str(i) for i in range(1, len(question.choices) + 1))
    lines.append(f"    Choose from [{numbers}] ({default}): ")
    return "\n".join(lines)


def _ask(question: Question, total: int, default: str | None, values, respond: Respond) -> str:
    for _ in range(MAX_ATTEMPTS):
        response = (respond(question, total, shown_default(question, default)) or "").strip()
        if not response:
            if default is None:
                log.error("%s 没有默认值，请输入内容", question.key)
                continue
        try:
            value = _coerce(question, response) if response else default
            _validate(question, value, values)
            return value
        except ValidationFailed as e:
            log.error("%s", e)
    raise ValidationFailed(f"{question.key} 连续 {MAX_ATTEMPTS} 次输入无效")


def resolve_answers(
    level,
    user_defaults: Mapping[str, str] | None = None,
    provided: Mapping[str, str] | None = None,
    respond: Respond | None = None,
) -> ProjectAnswers:
    """
    逐个问题解析答案

    Args:
        level: workspace / system / public
        user_defaults: 用户默认配置 (defaults.cfg)，可包含其他级别的 key
        provided: answers 文件中的答案，key 必须属于该级别
        respond: 交互回调，为 None 时为非交互模式

    Returns:
        校验通过的 ProjectAnswers
    """
    level = parse_level(level)
    user_defaults = user_defaults or {}
    provided = provided or {}
    questions = question_set(level)

    unknown = sorted(set(provided) - {q.key for q in questions})
    if unknown:
        raise UnknownAnswerKey(f"{level} 级别没有这些问题: {', '.join(unknown)}")

    values: dict[str, str] = {}
    for question in questions:
        if question.key in provided:
            value = _coerce(question, provided[question.key])
            _validate(question, value, values)
        elif respond is not None:
            default = _layer_default(question, user_defaults, values)
            value = _ask(question, len(questions), default, values, respond)
        else:
            default = _layer_default(question, user_defaults, values)
            if default is None:
                raise MissingAnswer(f"非交互模式下 {question.key} 没有答案也没有默认值")
            value = default
            _validate(question, value, values)
        values[question.key] = value
        log.debug("%s = %s", question.key, value)

    derived = None
    if "project_name" in values:
        derived = names.DerivedNames(
            github_repo_name=values["github_repo_name"],
            dist_name=values["conda_pypi_package_dist_name"],
            dir_name=values["package_dir_name"],
        )
    return ProjectAnswers(level=level, values=values, derived=derived)
