import sys

k, n = map(int, sys.stdin.read().split())
print(" ".join(str(i) for i in range(1, k + 1)))
