import sys

k, n = map(int, sys.stdin.read().split())
print(" ".join(str(i) for i in range(n - k + 1, n + 1)))
