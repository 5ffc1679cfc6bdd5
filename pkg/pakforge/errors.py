"""
pakforge 的异常体系
每个异常类都带有 exit_code，命令行入口据此返回退出码：
1 通用失败，2 未授权，3 输入无效，4 前置条件不满足
"""


class PakforgeError(Exception):
    exit_code = 1


class IoFailure(PakforgeError):
    """文件读写失败，保留出错路径和原始异常"""

    def __init__(self, path, cause):
        self.path = path
        self.cause = cause
        super().__init__(f"文件操作失败 {path}: {cause}")


class Unauthorized(PakforgeError):
    exit_code = 2


# ── 输入无效 (3) ─────────────────────────────────────────────────────────


class InvalidInput(PakforgeError):
    exit_code = 3


class ValidationFailed(InvalidInput):
    pass


class InvalidName(ValidationFailed):
    pass


class UnknownLevel(ValidationFailed):
    pass


class MissingAnswer(ValidationFailed):
    pass


class UnknownAnswerKey(ValidationFailed):
    pass


class ConfigParseError(InvalidInput):
    def __init__(self, path, line, reason):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")


class UnknownPlaceholder(InvalidInput):
    def __init__(self, key, location):
        self.key = key
        self.location = location
        super().__init__(f"未知占位符 '{key}' ({location})")


class BundleError(InvalidInput):
    pass


class InvalidSection(InvalidInput):
    pass


class FragmentParseError(InvalidInput):
    def __init__(self, file, line, reason):
        self.file = file
        self.line = line
        super().__init__(f"{file}:{line}: {reason}")


class InvalidTag(InvalidInput):
    def __init__(self, text, reason):
        self.text = text
        self.reason = reason
        super().__init__(f"无效的版本标签 '{text}': {reason}")


class UnknownPath(InvalidInput):
    pass


class InvalidAction(InvalidInput):
    pass


class ManifestError(InvalidInput):
    pass


# ── 前置条件不满足 (4) ───────────────────────────────────────────────────


class PreconditionFailed(PakforgeError):
    exit_code = 4


class RootExists(PreconditionFailed):
    pass


class AlreadyExists(PreconditionFailed):
    pass


class DuplicateVersion(PreconditionFailed):
    pass


class NonMonotonicTag(PreconditionFailed):
    def __init__(self, tag, existing_max):
        self.tag = tag
        self.existing_max = existing_max
        super().__init__(f"标签 {tag} 不大于已有的最大标签 {existing_max}")


class MissingMaintainer(PreconditionFailed):
    pass
