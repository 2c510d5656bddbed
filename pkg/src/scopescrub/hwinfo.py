"""Hardware and OS summary for job reports and benchmark labels.

Gathered from local OS facilities only; nothing leaves the machine.
"""

import platform

import psutil


def _cpu_model():
    try:
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                if line.lower().startswith("model name"):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return platform.processor() or platform.machine()


def summary():
    vm = psutil.virtual_memory()
    return {
        "os": platform.system(),
        "os_version": platform.release(),
        "machine": platform.machine(),
        "cpu_model": _cpu_model(),
        "physical_cores": psutil.cpu_count(logical=False),
        "logical_cores": psutil.cpu_count(logical=True),
        "memory_gb": round(vm.total / (1024 ** 3), 1),
    }


def machine_label():
    """Short stable label for benchmark records, e.g. 'Linux-x86_64-8c'."""
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 0
    return f"{platform.system()}-{platform.machine()}-{cores}c"
