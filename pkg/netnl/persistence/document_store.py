# netnl/persistence/document_store.py
"""
JSON Document Persistence Module.

Reads and writes the JSON documents the command-line tool exchanges
(behaviors, certificates, self-test reports, wired scenarios). Writes go to
a temporary sibling file that is then moved into place, so an interrupted
run never leaves a half-written document behind.
"""

import json
import logging
import os
import shutil
from typing import Any, Dict

from ..core.exceptions import DocumentFormatError

logger = logging.getLogger(__name__)


def write_document(path: str, document: Dict[str, Any]) -> str:
    """
    Writes `document` as indented JSON to `path` atomically.

    Returns:
        The path written.

    Raises:
        DocumentFormatError: if the document cannot be encoded or written.
    """
    directory = os.path.dirname(os.path.abspath(path))
    temp_path = f"{path}.{os.getpid()}.tmp"
    try:
        os.makedirs(directory, exist_ok=True)
        with open(temp_path, 'w', encoding='utf-8') as f:
            json.dump(document, f, indent=2)
            f.write('\n')
        shutil.move(temp_path, path)
    except (OSError, TypeError, ValueError) as e:
        logger.error(f"Failed to write document {path}: {e}", exc_info=True)
        if os.path.exists(temp_path):
            try:
                os.remove(temp_path)
            except OSError:
                pass
        raise DocumentFormatError(f"Could not write document: {e}", path=path) from e
    logger.info(f"Document written: {path}")
    return path


def read_text(path: str) -> str:
    """
    Raises:
        DocumentFormatError: if the file is missing, unreadable or empty.
    """
    if not os.path.exists(path):
        raise DocumentFormatError("Document not found.", path=path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise DocumentFormatError(f"Could not read document: {e}", path=path) from e
    if not text.strip():
        raise DocumentFormatError("Document is empty.", path=path)
    return text


def read_document(path: str) -> Dict[str, Any]:
    """
    Raises:
        DocumentFormatError: on a missing file or invalid JSON, with the
            line and column of the parse failure.
    """
    text = read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentFormatError(f"Invalid JSON: {e.msg}", path=path,
                                  location=f"line {e.lineno} column {e.colno}") from e
