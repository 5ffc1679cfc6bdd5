"""
pakforge 命令行入口

    pakforge create workspace|system|public
    pakforge news add|check
    pakforge changelog compile
    pakforge release plan
    pakforge migrate snapshot|plan|checklist|copy|lint-config
"""

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, migrate, news, prompts, release, templates
from .errors import IoFailure, PakforgeError

log = logging.getLogger(__name__)

EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """用法错误打印用法并以 64 退出"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def version_banner() -> str:
    return f"pakforge {__version__}"


def setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)


# ── create ───────────────────────────────────────────────────────────────


def _interactive_respond(question, total, default) -> str:
    try:
        return input(prompts.format_prompt(question, total, default))
    except EOFError:
        print()
        return ""


def cmd_create(args) -> int:
    level = prompts.parse_level(args.level)
    if args.config is not None:
        config_path = Path(args.config)
        if not config_path.is_file():
            raise IoFailure(config_path, FileNotFoundError("配置文件不存在"))
    else:
        config_path = prompts.default_config_path()
    user_defaults = prompts.load_user_defaults(config_path)
    provided = prompts.load_answers_file(args.answers) if args.answers else {}
    respond = None if args.yes else _interactive_respond

    answers = prompts.resolve_answers(level, user_defaults, provided, respond)
    tree = templates.render_tree(level, answers)
    report = templates.write_tree(
        tree, Path(args.dest), no_clobber=True, exist_ok=args.into_existing
    )
    templates.print_summary(report)
    return 0


# ── news / changelog ─────────────────────────────────────────────────────


def cmd_news_add(args) -> int:
    path = news.create_news(args.news_dir, args.name, args.section, args.item)
    print(f"✓ 已创建 {path}")
    return 0


def cmd_news_check(args) -> int:
    if args.changed_paths == "-":
        lines = sys.stdin.read().splitlines()
    else:
        path = Path(args.changed_paths)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise IoFailure(path, e) from e
    result = news.check_news_present(line for line in lines if line.strip())
    if result.passed:
        print(f"✓ {result.message}")
        return 0
    print(f"✗ {result.message}", file=sys.stderr)
    return 1


def cmd_changelog_compile(args) -> int:
    fragments = news.collect_news(args.news_dir)
    document = news.read_changelog(args.changelog)
    compiled = news.compile_changelog(args.version, fragments, document)
    if args.dry_run:
        sys.stdout.write(compiled.releases[0].text)
    else:
        news.write_changelog(args.changelog, compiled)
        print(f"✓ 已将 {len(fragments)} 个 news 文件写入 {args.changelog} ({args.version})")
    if args.clear_news:
        removed = news.clear_news(args.news_dir, dry_run=args.dry_run)
        for path in removed:
            print(f"{'would remove' if args.dry_run else 'removed'} {path}")
    return 0


# ── release ──────────────────────────────────────────────────────────────


def cmd_release_plan(args) -> int:
    project_dir = Path(args.project_dir)
    maintainer = args.maintainer or release.read_maintainer(project_dir)
    repo_state = release.RepoState(
        maintainer=maintainer,
        existing_tags=tuple(args.existing_tag),
        news_dir=Path(args.news_dir) if args.news_dir else project_dir / "news",
        changelog=Path(args.changelog) if args.changelog else project_dir / "CHANGELOG.rst",
    )
    plan = release.plan_release(args.tag, args.pusher, repo_state, conda_forge=args.conda_forge)
    sys.stdout.write(release.format_plan(plan))
    return 0


# ── migrate ──────────────────────────────────────────────────────────────


def _print_copy_results(results) -> None:
    for result in results:
        if result.status == "skipped":
            print(
                f"skipped {result.dst} (source {result.src_digest}, destination {result.dst_digest})"
            )
        else:
            print(f"{result.status} {result.src} -> {result.dst}")


def cmd_migrate_snapshot(args) -> int:
    manifest = migrate.snapshot_tree(args.directory, exclude=args.exclude)
    sys.stdout.write(migrate.dump_manifest(manifest))
    return 0


def cmd_migrate_plan(args) -> int:
    old = migrate.load_or_snapshot(args.old)
    new = migrate.load_or_snapshot(args.new)
    if args.format == "manifest":
        sys.stdout.write(migrate.dump_manifest(old))
        sys.stdout.write(migrate.dump_manifest(new))
        return 0
    sys.stdout.write(migrate.format_migration_plan(migrate.diff_manifests(old, new)))
    return 0


def cmd_migrate_checklist(args) -> int:
    plan = migrate.diff_manifests(migrate.load_or_snapshot(args.old), migrate.load_or_snapshot(args.new))
    resolved = migrate.load_resolved(args.resolved) if args.resolved else {}
    preserve = migrate.load_path_list(args.preserve) if args.preserve else None
    result = migrate.checklist(plan, resolved, reviewed=args.reviewed, preserve=preserve)
    sys.stdout.write(migrate.format_checklist(result))
    return 0 if result.complete else 1


def cmd_migrate_copy(args) -> int:
    if args.recursive:
        results = migrate.copy_tree_no_clobber(args.src, args.dst)
    else:
        results = [migrate.copy_no_clobber(args.src, args.dst)]
    _print_copy_results(results)
    return 0


def cmd_migrate_lint_config(args) -> int:
    _print_copy_results(migrate.copy_lint_config(args.new, args.old))
    return 0


# ── 参数解析 ─────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pakforge",
        description="科研 Python 项目脚手架、发布与迁移工具",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  # 交互式生成 public 级别的项目
  pakforge create public

  # 使用 answers 文件，不交互
  pakforge create system --answers answers.cfg --yes

  # 演练发布 rc 版本
  pakforge release plan 0.1.0-rc.0 --pusher sirlancelotbrave
        """,
    )
    parser.add_argument("--version", action="version", version=version_banner())
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v 显示 INFO，-vv 显示 DEBUG")
    commands = parser.add_subparsers(dest="command", required=True, metavar="<command>")

    create = commands.add_parser("create", help="生成 workspace / system / public 级别的项目")
    create.add_argument("level", help="workspace、system 或 public")
    create.add_argument("--answers", help="key = value 格式的答案文件")
    create.add_argument("--yes", action="store_true", help="不交互，未提供的答案使用默认值")
    create.add_argument("--dest", default=".", help="在该目录下生成项目，默认当前目录")
    create.add_argument("--config", help="用户默认配置文件，默认 $FORGE_CONFIG_DIR/defaults.cfg")
    create.add_argument("--into-existing", action="store_true", help="根目录已存在时仍写入（已有文件不覆盖）")
    create.set_defaults(handler=cmd_create)

    news_parser = commands.add_parser("news", help="管理 news 文件")
    news_commands = news_parser.add_subparsers(dest="news_command", required=True, metavar="<action>")
    add = news_commands.add_parser("add", help="新建 news/<name>.rst")
    add.add_argument("name", help="文件名（不含 .rst），通常与分支同名")
    add.add_argument("--section", required=True, choices=news.SECTIONS, help="小节")
    add.add_argument("--item", required=True, help="改动说明")
    add.add_argument("--news-dir", default="news", help="news 目录，默认 ./news")
    add.set_defaults(handler=cmd_news_add)
    check = news_commands.add_parser("check", help="检查 PR 改动中是否有 news 文件")
    check.add_argument("changed_paths", help="每行一个改动路径的文件，- 表示标准输入")
    check.set_defaults(handler=cmd_news_check)

    changelog = commands.add_parser("changelog", help="汇总 news 到 CHANGELOG")
    changelog_commands = changelog.add_subparsers(dest="changelog_command", required=True, metavar="<action>")
    compile_parser = changelog_commands.add_parser("compile", help="生成新版本块")
    compile_parser.add_argument("version", help="版本号，例如 0.1.0")
    compile_parser.add_argument("--news-dir", default="news", help="news 目录，默认 ./news")
    compile_parser.add_argument("--changelog", default="CHANGELOG.rst", help="默认 ./CHANGELOG.rst")
    compile_parser.add_argument("--clear-news", action="store_true", help="汇总后删除 news 文件")
    compile_parser.add_argument("--dry-run", action="store_true", help="只打印新版本块，不写文件")
    compile_parser.set_defaults(handler=cmd_changelog_compile)

    release_parser = commands.add_parser("release", help="发布演练")
    release_commands = release_parser.add_subparsers(dest="release_command", required=True, metavar="<action>")
    plan = release_commands.add_parser("plan", help="打印发布步骤")
    plan.add_argument("tag", help="M.m.p 或 M.m.p-rc.N")
    plan.add_argument("--pusher", required=True, help="推送标签的 GitHub 用户名")
    plan.add_argument("--maintainer", help="维护者用户名，默认从发布 workflow 中读取")
    plan.add_argument("--project-dir", default=".", help="项目目录，默认当前目录")
    plan.add_argument("--existing-tag", action="append", default=[], help="已有标签，可重复")
    plan.add_argument("--news-dir", help="默认 <project-dir>/news")
    plan.add_argument("--changelog", help="默认 <project-dir>/CHANGELOG.rst")
    plan.add_argument("--conda-forge", action="store_true", help="追加 conda-forge 提示步骤")
    plan.set_defaults(handler=cmd_release_plan)

    migrate_parser = commands.add_parser("migrate", help="旧项目迁移")
    migrate_commands = migrate_parser.add_subparsers(dest="migrate_command", required=True, metavar="<action>")
    snapshot = migrate_commands.add_parser("snapshot", help="打印目录的哈希清单")
    snapshot.add_argument("directory")
    snapshot.add_argument("--exclude", action="append", default=[".git"], help="跳过的目录名，默认 .git")
    snapshot.set_defaults(handler=cmd_migrate_snapshot)
    plan_cmd = migrate_commands.add_parser("plan", help="对比新旧目录")
    plan_cmd.add_argument("--old", required=True, help="旧项目目录或清单文件")
    plan_cmd.add_argument("--new", required=True, help="新项目目录或清单文件")
    plan_cmd.add_argument("--format", choices=("text", "manifest"), default="text")
    plan_cmd.set_defaults(handler=cmd_migrate_plan)
    checklist_cmd = migrate_commands.add_parser("checklist", help="检查迁移完成条件")
    checklist_cmd.add_argument("--old", required=True)
    checklist_cmd.add_argument("--new", required=True)
    checklist_cmd.add_argument("--resolved", help="每行 '<action> <path>' 的文件")
    checklist_cmd.add_argument("--reviewed", action="store_true", help="所有改动已审阅")
    checklist_cmd.add_argument("--preserve", help="每行一个必须保留（移动到新位置）的 deleted 路径")
    checklist_cmd.set_defaults(handler=cmd_migrate_checklist)
    copy = migrate_commands.add_parser("copy", help="不覆盖地复制 (cp -n)")
    copy.add_argument("src")
    copy.add_argument("dst")
    copy.add_argument("-r", "--recursive", action="store_true", help="复制目录")
    copy.set_defaults(handler=cmd_migrate_copy)
    lint = migrate_commands.add_parser("lint-config", help="把新项目的 lint 配置复制到旧项目")
    lint.add_argument("--new", required=True, help="新生成的 public 项目")
    lint.add_argument("--old", required=True, help="旧项目")
    lint.set_defaults(handler=cmd_migrate_lint_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    setup_logging(args.verbose)
    try:
        return args.handler(args)
    except PakforgeError as e:
        print(f"✗ {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\n已取消", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
