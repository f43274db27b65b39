def fl_centralized(nodeId, localData, privateData):
    for k in range(noIterations):
        if nodeId == flSrvId:
            # Server
            broadcastMsg(addresses, localData, nodeId)
            msgs = rcvMsgs(noNodes-1)
        else:
            # Client
            msg = rcvMsg()
            sendMsg(flSrvAddress, localData)
    terminated = 1
