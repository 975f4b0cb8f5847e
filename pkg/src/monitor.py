# src/monitor.py
"""
Logging setup and the training metrics history
"""
import logging
import json
from pathlib import Path
from typing import Dict, List, Optional


def setup_logging(level: str = "INFO", log_file: Optional[str] = None):
    """Stream handler plus an optional log file"""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


class TrainingMonitor:
    """Writes one JSON line per epoch: epoch, train_loss, dev_acc, dev_macro_f1

    Lines carry no timestamps, so identical runs produce identical files.
    """

    def __init__(self, metrics_file: Optional[str] = None):
        self.metrics_file = Path(metrics_file) if metrics_file else None
        self.history: List[Dict] = []

    def start_run(self):
        self.history = []
        if self.metrics_file:
            self.metrics_file.parent.mkdir(parents=True, exist_ok=True)
            self.metrics_file.write_text('', encoding='utf-8')

    def log_epoch(self, metrics: Dict):
        entry = {
            'epoch': metrics['epoch'],
            'train_loss': metrics['train_loss'],
            'dev_acc': metrics.get('dev_acc'),
            'dev_macro_f1': metrics.get('dev_macro_f1'),
        }
        self.history.append(entry)
        if self.metrics_file:
            self._append_jsonl(self.metrics_file, entry)

    def _append_jsonl(self, filepath: Path, data: Dict):
        """Append line to JSONL file"""
        with open(filepath, 'a', encoding='utf-8') as f:
            f.write(json.dumps(data, ensure_ascii=False) + '\n')

    @staticmethod
    def read_history(path: str) -> List[Dict]:
        with open(path, 'r', encoding='utf-8') as f:
            return [json.loads(line) for line in f if line.strip()]

    def summarize(self) -> Dict:
        """Best epoch by dev accuracy (earliest on ties) and loss trajectory"""
        if not self.history:
            return {}

        scored = [h for h in self.history if h['dev_acc'] is not None]
        best = max(scored, key=lambda h: (h['dev_acc'], -h['epoch'])) if scored else self.history[-1]

        return {
            'epochs': len(self.history),
            'best_epoch': best['epoch'],
            'best_dev_acc': best['dev_acc'],
            'first_train_loss': self.history[0]['train_loss'],
            'last_train_loss': self.history[-1]['train_loss'],
        }
